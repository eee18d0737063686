from configManager import runtimeConfigHandler
from configManager import presets
from configManager import configHandler
from configManager import argumentHandler
