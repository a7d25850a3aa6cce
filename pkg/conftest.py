import os
import sys
from pathlib import Path

from hypothesis import settings

# Add project root to Python path
sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("dev", deadline=None)
settings.register_profile("ci", deadline=None, max_examples=500)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))
