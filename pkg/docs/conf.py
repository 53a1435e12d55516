# -*- coding: utf-8 -*-
#
# Sphinx configuration of the deux documentation

import os
import sys
sys.path.insert(0, os.path.abspath('..'))

from deux import __version__

project = 'deux'
copyright = '2026, deux authors'
author = 'deux authors'

version = __version__
release = __version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'

html_theme = 'alabaster'
htmlhelp_basename = 'deux-doc'

latex_documents = [
    (master_doc, 'deux.tex', 'deux Documentation', author, 'manual'),
]
man_pages = [
    (master_doc, 'deux', 'deux Documentation', [author], 1)
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
}
