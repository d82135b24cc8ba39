import logging
import sys
from app.core.config import settings

logger = logging.getLogger('cfspace')
logger.setLevel(settings.LOG_LEVEL)

console_handler = logging.StreamHandler(sys.stderr)
console_handler.setLevel(settings.LOG_LEVEL)

formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')
console_handler.setFormatter(formatter)
logger.addHandler(console_handler)

if settings.LOG_FILE:
    file_handler = logging.FileHandler(settings.LOG_FILE)
    file_handler.setLevel(settings.LOG_LEVEL)
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)
