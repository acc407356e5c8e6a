import setuptools
import os

# Get the absolute path of requirements.txt
req_path = os.path.join(os.path.dirname(__file__), "requirements.txt")

# Read requirements.txt safely
with open(req_path, "r", encoding="utf-8") as f:
    requirements = f.read().splitlines()

# Read README.md
with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setuptools.setup(
    name="unlabeledtriangulation",
    version="0.1.0",
    description="Triangulation of unlabeled image points through symmetric tensor representations",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(include=["UnlabeledTriangulation", "UnlabeledTriangulation_cli"]),
    python_requires='>=3.10',
    license='MIT',
    install_requires=requirements,
    keywords="multiview geometry, triangulation, unlabeled triangulation, epipolar geometry, fundamental matrix, symmetric tensors, chow variety, plucker coordinates, numerical algebraic geometry",
    entry_points={
        'console_scripts': [
            'unlabeled-triang=UnlabeledTriangulation_cli.triang_cli:main',
        ],
    },
)
