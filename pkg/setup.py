from setuptools import setup, find_packages
from os import path
from io import open

here = path.abspath(path.dirname(__file__))

# Get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

version_str = '0.3.0'

setup(
    name='cmlab',
    version=version_str,
    description='Monte Carlo lab for the concave majorant of Brownian motion',
    long_description=long_description,
    long_description_content_type='text/markdown',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.11'
    ],
    package_dir={'': 'src'},
    packages=find_packages(where='src'),
    python_requires='>=3.8, <4',
    install_requires=['numpy>=1.20', 'scipy>=1.6', 'numba>=0.53'],
    extras_require={
        'dev': ['pytest', 'pytest-cov', 'flake8'],
        'docs': ['sphinx', 'sphinx-rtd-theme']
    },
    entry_points={
        'console_scripts': ['cmlab=cmlab.cli:main']
    },
    package_data={'': ['cfg/config.json']}
)
