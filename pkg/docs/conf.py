# -*- coding: utf-8 -*-
#
# hestonvar documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.
#
# All configuration values have a default; values that are commented out
# serve to show the default.

import sys
import os

# Module path
sys.path.insert(0, os.path.abspath('../src'))
# -- General configuration ------------------------------------------------


# If your documentation needs a minimal Sphinx version, state it here.
needs_sphinx = '1.3'

# Add any Sphinx extension module names here, as strings. They can be
# extensions coming with Sphinx (named 'sphinx.ext.*') or your custom
# ones.
extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.coverage',
    'sphinx.ext.mathjax',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
    'sphinx.ext.autosummary',
]


# Add any paths that contain templates here, relative to this directory.
templates_path = ['_templates']

# The suffix of source filenames.
source_suffix = '.rst'

# The master toctree document.
master_doc = 'index'

# General information about the project.
project = u'hestonvar'
copyright = u'2026, hestonvar developers'

# The version info for the project you're documenting, acts as replacement for
# |version| and |release|, also used in various other places throughout the
# built documents.
#
# The short X.Y version.

version = '0.0.0'
if os.path.exists("../src/hestonvar/version.py"):
    with open("../src/hestonvar/version.py") as version_file:
        for line in version_file.readlines():
            if "version = " in line:
                version = line.split(" = ")[1].replace("\"", "").strip()
                break

# The full version, including alpha/beta/rc tags.
release = version

numpydoc_show_class_members = False

# List of patterns, relative to source directory, that match files and
# directories to ignore when looking for source files.
exclude_patterns = ['build']

# If true, '()' will be appended to :func: etc. cross-reference text.
add_function_parentheses = True

# The reST default role (used for this markup: `text`) to use for all
# documents.
default_role = "py:obj"

# The name of the Pygments (syntax highlighting) style to use.
pygments_style = 'sphinx'

# A list of ignored prefixes for module index sorting.
modindex_common_prefix = ['hestonvar']


# -- Options for HTML output ----------------------------------------------

html_theme = "nature"

html_theme_options = {
}

# Output file base name for HTML help builder.
htmlhelp_basename = 'hestonvardoc'


# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}

latex_documents = [
  ('index', 'hestonvar.tex', u'hestonvar Documentation',
   u'hestonvar developers', 'manual'),
]


# -- Options for manual page output ---------------------------------------

man_pages = [
    ('index', 'hestonvar', u'hestonvar Documentation',
     [u'hestonvar developers'], 1)
]


# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
  ('index', 'hestonvar', u'hestonvar Documentation',
   u'hestonvar developers', 'hestonvar',
   'Weighted variational pricing toolkit for the Heston model.',
   'Miscellaneous'),
]


# Example configuration for intersphinx: refer to the Python standard library.
intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
}

napoleon_use_ivar = True
autodoc_default_flags = ['members', 'show-inheritance']


def autodoc_skip_member(app, what, name, obj, skip, options):
    exclusions = ('__weakref__',  # special-members
                  '__doc__', '__module__', '__dict__',  # undoc-members
                  )
    exclude = name in exclusions
    return skip or exclude


def setup(app):
    app.connect('autodoc-skip-member', autodoc_skip_member)


mathjax_path = "https://cdn.jsdelivr.net/npm/mathjax@3/es5/tex-svg.js"
mathjax3_config = {
    "tex": {
        "inlineMath": [['$', '$'], ['\\(', '\\)']]
    },
    "svg": {
        "fontCache": 'global'
    }
}
