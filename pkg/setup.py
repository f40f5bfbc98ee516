import setuptools

import treespark

version = treespark.version.rsplit(' ', maxsplit=1)[-1]

with open('requirements.txt', 'r') as f:
    requirements = f.read().splitlines()

setuptools.setup(
    name='treespark',
    version=version,
    scripts=['treespark_cli'],
    python_requires='>=3.9',
    install_requires=requirements,
    extras_require={
        'uvloop': ['uvloop>=0.17'],
        'tests': ['pytest>=7', 'pytest-asyncio>=0.21'],
    },
    packages=setuptools.find_packages(include=('treespark*',)),
    description='Random spanning tree spectral sparsifiers',
    author='The treespark developers',
    license='MIT Licence',
    long_description='Samples random spanning trees, certifies spectral '
    'approximation of averaged trees and checks the concentration machinery '
    'behind them exactly on small graphs',
    classifiers=[
        'Development Status :: 4 - Beta',
        'Framework :: AsyncIO',
        'License :: OSI Approved :: MIT License',
        'Operating System :: Unix',
        "Programming Language :: Python :: 3.9",
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
)
