import sys
from pathlib import Path

# Test helpers (builders, oracles) live next to the tests.
sys.path.insert(0, str(Path(__file__).parent))
