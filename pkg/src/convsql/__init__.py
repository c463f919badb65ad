"""convsql: context-dependent natural-language-to-SQL for multi-turn interactions."""

__version__ = "0.1.0"
