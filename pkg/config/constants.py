# Reference constants the measurements are compared against

# Shepp-Lloyd limits of the r-th longest cycle ratio in a random permutation
SHEPP_LLOYD = {
    1: 0.624329,   # Golomb-Dickman
    2: 0.209580,
    3: 0.088316,
}

# Goncharov: number of cycles ~ log n
GAMMA_REFERENCE = 1.0

ARTIN_CONSTANT = 0.373955

EULER_GAMMA = 0.5772156649015329

# Published averages over sampled (p, g) pairs per dyadic range
PUBLISHED_AVERAGES = {
    20: {"pairs": 500, "lambda1": 0.63946789, "lambda2": 0.19999487, "lambda3": 0.08646438, "gamma": 1.03813497},
    22: {"pairs": 500, "lambda1": 0.61508766, "lambda2": 0.21687612, "lambda3": 0.08450844, "gamma": 1.03324650},
    25: {"pairs": 500, "lambda1": 0.63157252, "lambda2": 0.20469932, "lambda3": 0.09092497, "gamma": 1.03014896},
    30: {"pairs": 60, "lambda1": 0.60441217, "lambda2": 0.21715242, "lambda3": 0.09354165, "gamma": 1.05566909},
}

# Hand-verified permutations used as fixtures
KNOWN_DECOMPOSITIONS = {
    (3, 2): [2],
    (7, 3): [3, 1, 1, 1],
    (11, 2): [5, 2, 2, 1],
}
