# Sphinx configuration for the suft documentation.
import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join('..', '..', 'src')))

project = 'suft'
author = 'suft developers'
release = '1.0.0'

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.napoleon']
napoleon_google_docstring = True
html_theme = 'alabaster'
