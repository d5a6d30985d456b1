"""Prompt template catalogs and rendering."""

from .catalog import catalog_hash, dump_catalog, find_template, load_templates, template_catalog
from .renderer import relation_phrase, render

__all__ = [
    "catalog_hash",
    "dump_catalog",
    "find_template",
    "load_templates",
    "relation_phrase",
    "render",
    "template_catalog",
]
