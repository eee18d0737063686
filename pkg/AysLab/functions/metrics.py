import numpy as np
from dataclasses import dataclass, asdict

GREEN = "GreenFixedPoint"
MOVING_WINDOW = 50


@dataclass(frozen=True)
class RunRecord:
    episode: int
    episode_return: float
    length: int
    outcome: str
    frames: int

    def to_dict(self):
        return asdict(self)


def moving_average(returns, window=MOVING_WINDOW):
    """Element i is the mean of returns max(0, i - window + 1)..i."""
    if window < 1:
        raise ValueError("window must be at least 1")
    returns = np.asarray(returns, dtype=np.float64)
    if returns.size == 0:
        return np.zeros(0)
    cumulative = np.concatenate([[0.0], np.cumsum(returns)])
    ends = np.arange(1, returns.size + 1)
    starts = np.maximum(0, ends - window)
    return (cumulative[ends] - cumulative[starts]) / (ends - starts)


def success_rate(outcomes):
    outcomes = list(outcomes)
    if not outcomes:
        return 0.0
    return sum(1 for outcome in outcomes if outcome == GREEN) / len(outcomes)


def summarize(records, window=MOVING_WINDOW):
    if not records:
        return {"episodes": 0, "frames": 0, "mean_return": 0.0, "success_rate": 0.0, "final_moving_average": 0.0,
                "outcomes": {}}
    returns = [r.episode_return for r in records]
    outcomes = {}
    for r in records:
        outcomes[r.outcome] = outcomes.get(r.outcome, 0) + 1
    return {
        "episodes": len(records),
        "frames": int(sum(r.length for r in records)),
        "mean_return": float(np.mean(returns)),
        "success_rate": success_rate(r.outcome for r in records),
        "final_moving_average": float(moving_average(returns, window)[-1]),
        "outcomes": dict(sorted(outcomes.items())),
    }


def aggregate_seeds(runs, window=MOVING_WINDOW):
    """Cross-seed summary of {seed: [RunRecord, ...]}.

    Success rates and mean returns are reported as mean and population std
    over seeds; moving-average curves are cropped to the shortest run before
    they are averaged episode by episode.
    """
    if not runs:
        raise ValueError("no runs to aggregate")
    seeds = sorted(runs)
    rates = np.array([success_rate(r.outcome for r in runs[seed]) for seed in seeds])
    means = np.array([np.mean([r.episode_return for r in runs[seed]]) if runs[seed] else 0.0 for seed in seeds])
    shortest = min(len(runs[seed]) for seed in seeds)
    curves = np.array([moving_average([r.episode_return for r in runs[seed]], window)[:shortest] for seed in seeds])
    curves = curves.reshape(len(seeds), shortest)
    return {
        "seeds": seeds,
        "success_rate_mean": float(np.mean(rates)),
        "success_rate_std": float(np.std(rates)),
        "mean_return_mean": float(np.mean(means)),
        "mean_return_std": float(np.std(means)),
        "episodes": shortest,
        "moving_average_mean": [float(v) for v in np.mean(curves, axis=0)],
        "moving_average_std": [float(v) for v in np.std(curves, axis=0)],
        "per_seed": {str(seed): {"success_rate": float(rate), "mean_return": float(mean), "episodes": len(runs[seed])}
                     for seed, rate, mean in zip(seeds, rates, means)},
    }
