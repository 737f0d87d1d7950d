from core.cli.commands import COMMANDS, get_command
from core.cli.main import main
from core.cli.manifest import RunManifest, load_grid

__all__ = ['COMMANDS', 'RunManifest', 'get_command', 'load_grid', 'main']
