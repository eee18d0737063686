from logManager.logger import Logger

# shared registry, configured once by the entry script
logger = Logger()
