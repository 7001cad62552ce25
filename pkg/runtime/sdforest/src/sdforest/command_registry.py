""" Minimal Zero-Overhead Command Registry"""
from typing import Callable, Optional

_REGISTERED_COMMANDS = {}


def cli_command(func=None, *, name=None, help=None, arguments=None, tags=None):  # pylint: disable=redefined-builtin
    """
    Minimal decorator for CLI command registration.

    `arguments` is a callable receiving the command's argparse sub-parser.
    """

    def decorator(handler: Callable):
        command_name = name or handler.__name__.removeprefix("cmd_").replace("_", "-")
        doc = (handler.__doc__ or "").strip()
        _REGISTERED_COMMANDS[command_name] = {
            'handler': handler,
            'module': handler.__module__,
            'help': help or (doc.splitlines()[0] if doc else ""),
            'arguments': arguments,
            'tags': tags or set(),
        }
        return handler

    if func is not None:
        return decorator(func)
    return decorator


def get_registered_commands():
    """ get all commands with decorators"""
    return _REGISTERED_COMMANDS.copy()


def get_commands_by_tag(tag: str):
    return {name: info.copy() for name, info in _REGISTERED_COMMANDS.items() if tag in info.get('tags', set())}


def get_command(name: str) -> Optional[dict]:
    info = _REGISTERED_COMMANDS.get(name)
    return info.copy() if info else None


# Convenience-Aliases (zero-overhead)


def model_command(func=None, **kwargs):
    """Command working on data or fitted models"""
    kwargs.setdefault('tags', {'model'})
    return cli_command(func, **kwargs)


def experiment_command(func=None, **kwargs):
    """Command running a simulation experiment"""
    kwargs.setdefault('tags', {'experiment'})
    return cli_command(func, **kwargs)
