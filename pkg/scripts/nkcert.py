#!/usr/bin/env python3
"""
Certified Newton-Kantorovich solver CLI.

Run from project root:
    python scripts/nkcert.py corpus
    python scripts/nkcert.py certify --problem scalar_sqrt2_smooth
    python scripts/nkcert.py audit --problem hoelder_scalar --set L=0.1
"""

import sys
from pathlib import Path

# Add project root to path
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.orchestration.cli import main


if __name__ == "__main__":
    sys.exit(main())
