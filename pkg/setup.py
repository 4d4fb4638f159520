"""
cslrate Package Setup

This script configures the package for distribution and installation.
It reads package metadata from README.md and dependencies from requirements.txt.
"""

from setuptools import setup, find_packages

# Read package description from README
with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

# Read package dependencies from requirements.txt
with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [
        line.strip()
        for line in fh
        if line.strip() and not line.startswith("#")
    ]

setup(
    name="cslrate",
    version="0.1.0",
    license="MIT",
    platforms=["any"],
    description="Collapse rates and diffusion coefficients of rigid bodies in the CSL model",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    # Package classification
    classifiers=[
        # Development status
        "Development Status :: 3 - Alpha",

        # Intended audience
        "Intended Audience :: Science/Research",

        # License
        "License :: OSI Approved :: MIT License",

        # Python versions
        "Programming Language :: Python :: 3 :: Only",
        "Programming Language :: Python :: 3.11",

        # Environment and topics
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    # Package requirements
    python_requires=">=3.11",
    install_requires=requirements,
    extras_require={
        "test": ["pytest>=7.0", "hypothesis>=6.0"],
    },

    # Command-line entry points
    entry_points={
        "console_scripts": [
            "cslrate=cslrate.__main__:main",
        ],
    },

    # Package data
    include_package_data=True,
    zip_safe=False,
)
