import sys
from pathlib import Path

# Make sibling helper modules (oracles, desk_corpora) importable from tests.
sys.path.insert(0, str(Path(__file__).parent))
