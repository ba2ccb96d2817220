import os
import sys
from setuptools import setup, find_packages


def _parse_version(text):
    """'2.1.0+cu118' -> (2, 1)"""
    parts = text.split('+')[0].split('.')
    return int(parts[0]), int(parts[1])


def _report_dependency_errors(error_suggestion_pairs):
    """Print each error with numbered, indented suggestions in yellow"""
    yellow, reset = "\033[93m", "\033[0m"
    lines = ["=" * 60, "DEPENDENCY ERRORS AND INSTALLATION SUGGESTIONS:"]
    for k, (error, suggestions) in enumerate(error_suggestion_pairs):
        if k:
            lines.append("")
        lines.append(f"   • {error}")
        for i, suggestion in enumerate(suggestions, 1):
            first, *rest = suggestion.split("\n")
            lines.append(f"      {i}. {first}")
            lines.extend(f"         {line}" for line in rest)
    lines.append("=" * 60)
    print("\n".join(yellow + line for line in lines))
    print(reset)


def check_dependencies():
    """Exit on installed versions too old to use; missing packages come from install_requires"""
    error_suggestion_pairs = []

    # Predefined suggestion texts
    TORCH_INSTALL = "Please install PyTorch with version >=2.0.0 using: pip install 'torch>=2.0.0'"
    TORCH_CPU = """CPU-only wheels are enough for henondyn: pip install torch --index-url https://download.pytorch.org/whl/cpu
   Latest info: https://pytorch.org/get-started/locally/"""
    NUMPY_INSTALL = "Please install NumPy with version >=1.22 using: pip install 'numpy>=1.22'"

    # Check PyTorch version
    try:
        import torch
        major, _ = _parse_version(torch.__version__)
        if major < 2:
            error = f"PyTorch version {torch.__version__} is too old. Required: >=2.0.0"
            error_suggestion_pairs.append((error, [TORCH_INSTALL, TORCH_CPU]))
    except ImportError:
        pass
    except Exception as e:
        error_suggestion_pairs.append((f"Failed to check PyTorch version: {e}", []))

    # Check NumPy version; scipy and torch are built against it
    try:
        import numpy
        major, minor = _parse_version(numpy.__version__)
        if (major, minor) < (1, 22):
            error = f"NumPy version {numpy.__version__} is too old. Required: >=1.22"
            error_suggestion_pairs.append((error, [NUMPY_INSTALL]))
    except ImportError:
        pass
    except Exception as e:
        error_suggestion_pairs.append((f"Failed to check NumPy version: {e}", []))

    if error_suggestion_pairs:
        _report_dependency_errors(error_suggestion_pairs)
        sys.exit(1)


def print_runtime_config_help():
    """Print the environment variables henondyn reads at run time"""
    help_text = """
=== henondyn Runtime Configuration Help ===

Command-line flags always win over these variables.

PARALLELISM:
  HENONDYN_WORKERS=4       Worker-pool size for periodic-point solves, searches,
                           scans and slice rendering (default: 1)
                           - Results are identical for every worker count

ORBIT ITERATION:
  HENONDYN_DEVICE=cpu      Torch device for batched orbit iteration (default: cpu)
                           - cpu: always available
                           - cuda: falls back to cpu with a warning when unavailable

OUTPUT:
  HENONDYN_PLAIN_OUTPUT=1  Plain text logs and tables without colors (default: 0)
                           - Values: 1/true/yes (enable), 0/false/no (disable)

COMMON SCENARIOS:

  1. Standard install:
     pip install .

  2. Scan with 8 workers, plain logs for a batch job:
     HENONDYN_WORKERS=8 HENONDYN_PLAIN_OUTPUT=1 henondyn scan --moduli 0.99 --out scan.json

  3. Check the installation:
     henondyn selftest

===========================================
"""
    print(help_text)


def show_current_config():
    """Show the runtime configuration picked up from the environment"""
    print("=== Runtime Configuration ===")
    config_items = [
        f"Workers: {os.getenv('HENONDYN_WORKERS', '1')}",
        f"Device: {os.getenv('HENONDYN_DEVICE', 'cpu')}",
    ]
    plain = os.getenv("HENONDYN_PLAIN_OUTPUT", "0").lower() in ("1", "true", "yes")
    config_items.append(f"Plain Output: {'Enabled' if plain else 'Disabled'}")
    print(" | ".join(config_items))
    print("=============================")


# Check for help request
if "--help-config" in sys.argv:
    print_runtime_config_help()
    show_current_config()
    sys.exit(0)

# Check critical dependencies
check_dependencies()

setup(
    name="henondyn",
    version="0.1.0",
    description="Dynamics of complex Hénon maps: periodic spectra, Lyapunov exponents and parameter space",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "torch>=2.0.0",
        "numpy>=1.22",
        "scipy>=1.9",
        "rich",
        "pydantic>=2.0.0",
        "pillow",
    ],
    extras_require={
        "test": ["pytest"],
    },
    entry_points={
        "console_scripts": [
            "henondyn=henondyn.cli:main",
        ],
    },
    zip_safe=False,
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
