import re
import sys
from warnings import warn
from setuptools import setup

if sys.version_info < (3, 8, 0):
    warn("The minimum Python version supported by tlstoolkit is 3.8.0")
    exit()

# version without importing the package at build time
with open('tlstoolkit/__init__.py', encoding='utf-8') as init:
    __version__ = re.search(r"__version__ = '([^']+)'", init.read()).group(1)

setup(
    name='tlstoolkit',
    version=__version__,
    description='Coherence model of clock-state Tb:LiYF4 spin qubits',
    author='Martin Renters',
    license='GPLv3',
    packages=['tlstoolkit'],
    classifiers=[
        'Development Status :: 4 - Beta',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Topic :: Scientific/Engineering :: Physics',
    ],
    scripts = [
        'scripts/tlstoolkit',
    ],
    install_requires=[
        'numpy>=1.22',
        'scipy>=1.8',
        'joblib>=1.1',
        'requests>=2.24.0',
        'openpyxl>=3.1.2',
        'XlsxWriter>=3.0.9',
    ],
    package_data={'tlstoolkit': ['data/*']},
)
