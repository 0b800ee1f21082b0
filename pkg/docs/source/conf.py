import os
import sys
from importlib.metadata import PackageNotFoundError, version

# autodoc imports the package from the repository root when it is not installed
sys.path.insert(0, os.path.abspath("../.."))


project = "ExtremePy"
copyright = "2023, Di Lu"
author = "Di Lu"

try:
    release = version("extremepy")
except PackageNotFoundError:
    release = "0.1.0"


extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.mathjax",
    "sphinxcontrib.autodoc_pydantic",
]

# Only the config models are rendered; compiled and parallel backends are not needed
autodoc_mock_imports = ["numba", "dask", "distributed", "arch"]

templates_path = ["_templates"]
language = "zh_CN"
exclude_patterns = []


html_theme = "pydata_sphinx_theme"
html_title = "ExtremePy: 空间极值相依模型"
html_theme_options = {
    "header_links_before_dropdown": 4,
    "navigation_with_keys": False,
}


# -- Pydantic autodoc: configuration models are documented field by field --
autodoc_pydantic_model_show_json = False
autodoc_pydantic_model_show_config_summary = False
autodoc_pydantic_model_show_field_summary = True
autodoc_pydantic_model_show_validator_members = False
autodoc_pydantic_model_show_validator_summary = False
autodoc_pydantic_model_show_config_members = False
autodoc_pydantic_field_list_validators = False
autodoc_pydantic_model_member_order = "bysource"
