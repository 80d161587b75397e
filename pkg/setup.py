from setuptools import setup, find_packages

VERSION = "0.1.0"

setup(
    name='killingfoliator',
    version=VERSION,
    description='Killing vector fields on Euclidean space: Lie closure, flows, orbit dimension and the '
                'classification of the foliations they generate',
    license='MIT',
    keywords='Killing field isometry Lie algebra foliation orbit differential geometry',
    packages=find_packages(),
    include_package_data=True,
    classifiers=[
        "Programming Language :: Python",
        "Programming Language :: Python :: 3.7",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Development Status :: 3 - Alpha",
        "Operating System :: POSIX",
        "Operating System :: MacOS :: MacOS X",
        "Operating System :: Microsoft :: Windows",
        "Intended Audience :: Science/Research",
        "Intended Audience :: Education",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    install_requires=[
        'numpy',
        'scipy',
        'simplejson',
        'pandas',
        'tqdm',
    ],
    extras_require={
        'test': ['pytest'],
    },
)
