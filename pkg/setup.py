#!/usr/bin/env python3

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

with open("requirements.txt", "r", encoding="utf-8") as fh:
    requirements = [line.strip() for line in fh if line.strip() and not line.startswith("#")]

setup(
    name="ontology-harness",
    version="1.0.0",
    author="Ontology Harness contributors",
    description="Ontology-learning task datasets and zero-shot language model evaluation",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    keywords="ontology learning, term typing, taxonomy discovery, relation extraction, language models",
    packages=find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    python_requires=">=3.9",
    install_requires=requirements,
    extras_require={
        "test": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "ontology-harness=ontology_harness.cli:main",
        ],
    },
    include_package_data=True,
    package_data={
        "ontology_harness": [
            "prompts/templates/*.jsonl",
            "evaluation/synonyms/*.yaml",
            "reporters/templates/*.txt",
        ],
    },
)
