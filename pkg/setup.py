#!/usr/bin/env python3
from setuptools import find_packages, setup

with open('README.rst') as f:
    readme = f.read()

with open('AUTHORS') as f:
    authors = f.read().strip().replace('\n', ', ')

setup(
    name='MagVlasov',
    version='0.1.0',
    description='MagVlasov is a particle simulator for the Vlasov-Poisson system in a uniform magnetic field, with a harness that checks the a priori estimates such a system satisfies on its runs.',
    long_description=readme,
    author=authors,
    author_email='',
    license='mit',
    packages=find_packages(exclude=['test', 'test.*']),
    python_requires='>=3.8',
    install_requires=['numpy>=1.20', 'scipy>=1.6'],
    extras_require={'test': ['pytest']},
    entry_points={'console_scripts': ['magvlasov=magvlasov.tools.cli:main']},
    package_data={'': ['README.rst']},
)
