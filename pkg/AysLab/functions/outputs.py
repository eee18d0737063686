import csv
import json
import os
import logManager

logging = logManager.logger.get_logger(__name__)


def ensure_dir(path):
    if path and not os.path.exists(path):
        os.makedirs(path)
    return path


def write_json(path, data):
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(data, fp, indent=2, sort_keys=True)
        fp.write("\n")


def read_json(path):
    with open(path, "r", encoding="utf-8") as fp:
        return json.load(fp)


class JsonLines():
    """Append-only line-delimited JSON stream."""

    def __init__(self, path):
        self.path = path
        self.fp = open(path, "w", encoding="utf-8")

    def write(self, record):
        self.fp.write(json.dumps(record, sort_keys=True) + "\n")

    def flush(self):
        self.fp.flush()

    def close(self):
        self.fp.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_jsonl(path):
    with open(path, "r", encoding="utf-8") as fp:
        return [json.loads(line) for line in fp if line.strip()]


def write_grid_csv(path, a_axis, y_axis, matrix, formatter="%.12g"):
    """Matrix with rows indexed by y and columns by a, both axes in the header."""
    with open(path, "w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp)
        writer.writerow(["y\\a"] + [formatter % a for a in a_axis])
        for y, row in zip(y_axis, matrix):
            writer.writerow([formatter % y] + [formatter % v if isinstance(v, float) else v for v in row])
    logging.debug("Grid written to " + str(path))


def read_grid_csv(path):
    with open(path, "r", newline="", encoding="utf-8") as fp:
        rows = list(csv.reader(fp))
    a_axis = [float(a) for a in rows[0][1:]]
    y_axis = [float(row[0]) for row in rows[1:]]
    return a_axis, y_axis, [row[1:] for row in rows[1:]]
