from setuptools import setup, find_packages

setup(
    name='csvr',
    version='0.1.0',
    package_dir={'': 'src'},
    packages=find_packages('src'),
    include_package_data=True,
    package_data={'csvr': ['presets/*.json']},
    install_requires=[
        'Click',
        'numpy',
        'scipy',
        'pandas',
        'scikit-learn',
        'tqdm',
        'joblib',
    ],
    entry_points={
        'console_scripts': [
            'csvr = csvr.__main__:cli',
        ],
    },
)
