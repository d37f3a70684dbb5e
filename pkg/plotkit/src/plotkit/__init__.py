"""Figure renderer for sweep CSV tables."""

from .render import FigureSpec, SchemaError, dump, load_table, render

__version__ = "0.1.0"
