import os
from dotenv import load_dotenv

load_dotenv()

# Memory threshold for the decompose power table and visited bitset (bytes)
MEM_BUDGET = int(os.getenv("EXPCYCLE_MEM_BUDGET", str(2 * 1024**3)))

# Max trajectory length walked by freq and the pair statistics
STEP_BUDGET = int(os.getenv("EXPCYCLE_STEP_BUDGET", str(2**32)))

# Max |A|^2 for sumset / productset cardinalities
PAIR_BUDGET = int(os.getenv("EXPCYCLE_PAIR_BUDGET", str(2**26)))

# Redis cache for survey records, empty string disables caching
REDIS_URL = os.getenv("EXPCYCLE_REDIS_URL", "")

LOG_LEVEL = os.getenv("EXPCYCLE_LOG_LEVEL", "WARNING")

# Cache TTL settings (in seconds)
CACHE_TTL = {
    'record': 2592000,       # 30 days, records are pure functions of (p, g)
}

# Largest p for which x -> g^x fits an int64 table (products stay below 2^63)
TABLE_MODE_MAX_P = 2**31

# Sampling
SAMPLE_RETRY_CAP = 10_000

# Scan limits
ARTIN_MAX_Q = 10_000
FIXED_POINT_MAX_K = 3
RCOUNT_MAX_P = 2**32

DEFAULT_WORKERS = 1
