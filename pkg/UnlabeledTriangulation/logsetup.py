"""
Named logger shared by every module of the package.

Library modules only emit records; handlers are attached by
configure_logging(), which the command line front end calls once.
"""

import logging

# Named logger for the package.
logger = logging.getLogger("unlabeledtriang")
logger.propagate = False

LOG_FORMAT = "UnlabeledTriangulation: %(name)s - %(levelname)s - %(message)s"
FILE_LOG_FORMAT = "%(asctime)s.%(msecs)03d - " + LOG_FORMAT


def configure_logging(level=logging.WARNING, log_file=None):
    """
    Attach a console handler (and optionally a file handler) to the
    package logger.

    Args:
        level (int): Level of the console handler.
        log_file (str, optional): Path of a log file receiving every record
            at DEBUG level. No file is written when None.

    Returns:
        logging.Logger: The configured package logger.
    """
    # We capture all, then filter via handlers
    logger.setLevel(logging.DEBUG)

    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(
            logging.Formatter(FILE_LOG_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
        logger.addHandler(file_handler)

    return logger
