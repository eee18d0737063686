import logging
import logging.handlers
import os
import sys

RUN_LOG_NAME = "ayslab.log"


def _get_log_format():
    return logging.Formatter('%(asctime)s - %(name)s - %(lineno)d - %(levelname)s - %(message)s')


class Logger:
    """Registry of module loggers sharing one console setup and one run log.

    Console output goes to stdout up to INFO and to stderr from WARNING. Once a
    run directory is known every logger also writes to <run_dir>/ayslab.log
    through a single rotating handler, replaced when the next run starts.
    """

    loggers = {}
    logLevel = logging.DEBUG # Capture all logs prior to switching
    runDir = None
    runHandler = None

    def configure_logger(self, level, runDir=None):
        self.logLevel = getattr(logging, level)
        if runDir != self.runDir or self.runHandler is None:
            self._close_run_log()
            self.runDir = runDir
            if runDir:
                self.runHandler = self._open_run_log(runDir)

        for loggerName in self.loggers:
            self.loggers[loggerName].handlers.clear()
            self._setup_logger(loggerName)

    @property
    def run_log(self):
        if not self.runDir:
            return None
        return os.path.join(self.runDir, RUN_LOG_NAME)

    def _open_run_log(self, runDir):
        os.makedirs(runDir, exist_ok=True)
        handler = logging.handlers.RotatingFileHandler(filename=os.path.join(runDir, RUN_LOG_NAME),
                                                       maxBytes=(10000000), backupCount=7, encoding="utf-8")
        handler.setFormatter(_get_log_format())
        handler.setLevel(logging.DEBUG)
        return handler

    def _close_run_log(self):
        if self.runHandler is not None:
            for logger in self.loggers.values():
                logger.removeHandler(self.runHandler)
            self.runHandler.close()
            self.runHandler = None

    def _setup_logger(self, name):
        logger = logging.getLogger(name)

        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(_get_log_format())
        handler.setLevel(logging.DEBUG)
        handler.addFilter(lambda record: record.levelno <= logging.INFO)
        logger.addHandler(handler)

        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(_get_log_format())
        handler.setLevel(logging.WARNING)
        logger.addHandler(handler)

        if self.runHandler is not None:
            logger.addHandler(self.runHandler)

        logger.setLevel(self.logLevel)
        logger.propagate = False
        return logger

    def get_logger(self, name):
        if name not in self.loggers:
            self.loggers[name] = self._setup_logger(name)
        return self.loggers[name]

    def get_level_name(self):
        return logging.getLevelName(self.logLevel)
