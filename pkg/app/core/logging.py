import logging

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: str = "INFO") -> None:
    """Настраивает корневой логгер (один обработчик на процесс)"""
    root = logging.getLogger()
    if not any(getattr(h, "_core_handler", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._core_handler = True
        root.addHandler(handler)
    root.setLevel(level.upper())
