from setuptools import setup, find_packages
import os

APP_NAME = "sbts-sim"
VERSION = "1.0.0"
DESCRIPTION = "Skill-Based Task Selection: adaptive task assignment simulator with simulated student cohorts"

# Read long description from README
def read_long_description():
    if os.path.exists('README.md'):
        with open('README.md', 'r', encoding='utf-8') as f:
            return f.read()
    return DESCRIPTION

# Read requirements
def read_requirements():
    if os.path.exists('requirements.txt'):
        with open('requirements.txt', 'r') as f:
            return [line.strip() for line in f if line.strip() and not line.startswith('#')]
    return ['numpy>=1.22']

setup(
    name=APP_NAME,
    version=VERSION,
    description=DESCRIPTION,
    long_description=read_long_description(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=['tests', 'examples']),
    py_modules=[
        'main', 'cli', 'task_types', 'knowledge_matrix', 'sbts_policy',
        'task_generation', 'student_env', 'experiment_harness',
        'profile_manager', 'result_writer', 'utils'
    ],
    install_requires=read_requirements(),
    extras_require={
        'test': ['pytest>=7.0', 'hypothesis>=6.0'],
    },
    python_requires='>=3.8',
    entry_points={
        'console_scripts': [
            'sbts-sim=main:main',
        ],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Intended Audience :: Education",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Education",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    keywords="intelligent-tutoring multi-armed-bandit epsilon-greedy simulation curriculum",
    include_package_data=True,
    package_data={
        '': ['*.md', '*.txt', 'profiles/*.json'],
    },
)
