import sys
from pathlib import Path

# make the oracle module importable from any test file
sys.path.insert(0, str(Path(__file__).resolve().parent))
