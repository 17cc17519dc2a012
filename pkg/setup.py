#!/usr/bin/env python

try:
    from setuptools import setup
except ImportError:
    raise RuntimeError('setuptools is required')


DESCRIPTION = 'Conservative flux optimization finite elements for convection-diffusion problems.'

LONG_DESCRIPTION = """
Cfotools is a collection of tools for locally conservative finite element
flux computation, convergence studies and two-phase porous media transport.
"""

DISTNAME = 'cfotools'
VERSION = '0.1.0'
LICENSE = 'MIT'
AUTHOR = 'Cfotools Python Developers'

SETUP_REQUIRES = [
    'pytest-runner',
]

TESTS_REQUIRE = [
    'pytest >= 3.6.3',
]

INSTALL_REQUIRES = [
    'numpy >= 1.17',
    'pandas >= 1.0',
    'statsmodels >= 0.10',
    'scipy >= 1.4',
    'h5py >= 2.7.1',
]

CLASSIFIERS = [
    'Development Status :: 4 - Beta',
    'License :: OSI Approved :: MIT License',
    'Operating System :: OS Independent',
    'Intended Audience :: Science/Research',
    'Programming Language :: Python',
    'Programming Language :: Python :: 3',
    'Topic :: Scientific/Engineering',
]

KEYWORDS = [
    'finite element',
    'conservative flux',
    'convection-diffusion',
    'porous media',
    'two-phase flow',
]

setuptools_kwargs = {
    'zip_safe': False,
    'entry_points': {
        'console_scripts': ['cfotools = cfotools.cli:main'],
    },
    'include_package_data': True
}

# set up packages to be installed and extensions to be compiled
PACKAGES = ['cfotools', 'cfotools.test']


setup(name=DISTNAME,
      version=VERSION,
      packages=PACKAGES,
      keywords=KEYWORDS,
      setup_requires=SETUP_REQUIRES,
      tests_require=TESTS_REQUIRE,
      install_requires=INSTALL_REQUIRES,
      description=DESCRIPTION,
      long_description=LONG_DESCRIPTION,
      author=AUTHOR,
      license=LICENSE,
      classifiers=CLASSIFIERS,
      **setuptools_kwargs)
