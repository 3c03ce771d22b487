from pathlib import Path

import setuptools

description = "Checks and constructions for projectively flat general (α,β)-metrics"

# Root-level manifest: the packages live under code/ (see code/setup.py).
requirements_file = Path(__file__).parent / "requirements.txt"
with requirements_file.open("r") as fh:
    requirement_lines = fh.readlines()

setuptools.setup(
    name="finslerhub",
    version="0.1.0",
    description=description,
    long_description=description,
    package_dir={"": "code"},
    packages=setuptools.find_packages(where="code"),
    python_requires=">=3.7",
    entry_points={"console_scripts": ["gabmetrics = gabmetrics.__main__:main"]},
    include_package_data=True,
    package_data={"finslerhub": ["config.yaml"]},
    install_requires=requirement_lines,
    extras_require={
        "dev": [
            "black>=19.10b0",
            "flake8>=3.7.9",
            "hypothesis>=5.10",
            "pre-commit>=2.2.0",
            "pytest>=5.4.1",
            "pytest-xdist>=1.31.0",
        ],
    },
)
