from utils.debug_logger import debug_logger

logger = debug_logger.get_logger()
