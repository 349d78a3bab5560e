from setuptools import setup, find_packages

setup(
    name="qdpulse",
    version="0.1.0",
    description="Simulate pulsed charge injection and entanglement in coupled quantum-dot charge qubits",
    author="",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "pyyaml>=6.0.1",
        "click>=8.1.7",
        "tqdm>=4.66.0",
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "qdpulse=qdpulse.cli:main",
        ],
    },
    include_package_data=True,
)
