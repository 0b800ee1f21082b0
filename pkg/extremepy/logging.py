import os
import logging
import logging.handlers
from typing import TYPE_CHECKING, Iterable
from colorlog import ColoredFormatter

if TYPE_CHECKING:
    from extremepy.optimization.result import FitResult
    from extremepy.depmeasures.types import DependenceCurve


LOG_DIR = os.path.expanduser("~/.extremepy/logs")
LOG_FILENAME = os.path.join(LOG_DIR, "extremepy.log")


if not os.path.exists(LOG_DIR):
    os.makedirs(LOG_DIR)


class ExtremePyLogger:
    def __init__(self, logger: logging.Logger) -> None:
        self._logger = logger
        self.info = logger.info
        self.debug = logger.debug
        self.warn = logger.warning
        self.error = logger.error
        self.exception = logger.exception

    def log_fit(self, result: "FitResult"):
        lines = [
            f"模型: {result.family}, 对数似然: {result.loglik:.4f}, BIC: {result.bic:.4f}, "
            f"收敛: {result.converged}, 评估次数: {result.evaluations}"
        ]
        for name, value in result.estimates.items():
            se = result.stderrs.get(name)
            se_str = "NA" if se is None else f"{se:.4g}"
            lines.append(f"  {name} = {value:.6g} (SE {se_str})")
        if result.flags:
            lines.append(f"  标记: {', '.join(result.flags)}")
        self.info("\n" + "\n".join(lines))

    def log_curves(self, curves: Iterable["DependenceCurve"]):
        self.info("\n" + "\n".join(str(c) for c in curves))


class Logging:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._logger = None
        return cls._instance

    def get_logger(self) -> ExtremePyLogger:
        if self._logger is not None:
            return self._logger

        logger = logging.getLogger("extremepy")
        logger.setLevel(logging.DEBUG)
        logger.propagate = False

        # Set up file handler
        file_handler = logging.handlers.TimedRotatingFileHandler(
            LOG_FILENAME, when="D", interval=1, backupCount=30
        )
        file_handler.setLevel(logging.DEBUG)
        file_formatter = logging.Formatter(
            "[%(module)s] [%(asctime)s] [%(levelname)s]: %(message)s"
        )

        file_handler.setFormatter(file_formatter)
        logger.addHandler(file_handler)

        # Console output only needs warnings and progress messages
        color_formatter = ColoredFormatter(
            fmt="%(log_color)s[%(module)s] [%(asctime)s] [%(levelname)s]: %(message)s%(reset)s"
        )
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(color_formatter)
        console_handler.setLevel(logging.INFO)
        logger.addHandler(console_handler)

        self._logger = ExtremePyLogger(logger)
        return self._logger


LOG = Logging().get_logger()
