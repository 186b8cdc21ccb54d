"""
POP-CNN
Odor pleasantness prediction from electronic-nose signals
"""
from setuptools import setup, find_packages

with open("requirements.txt") as f:
    install_requires = [
        line.strip() for line in f
        if line.strip() and not line.startswith("#")
    ]

with open("README.md") as f:
    long_description = f.read()

setup(
    name="pop-cnn",
    version="1.0.0",
    description="Odor pleasantness prediction from e-nose signals with a small convolutional network",
    long_description=long_description,
    long_description_content_type="text/markdown",
    author="POP-CNN contributors",
    packages=find_packages(exclude=["examples", "examples.*"]),
    zip_safe=False,
    include_package_data=True,
    install_requires=install_requires,
    python_requires=">=3.10",
    entry_points={
        "console_scripts": [
            "pop-cnn=pop_cnn.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Topic :: Scientific/Engineering :: Chemistry",
    ],
)
