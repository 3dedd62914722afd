"""Plain double-loop reference for the seven Haralick statistics."""

import math


def haralick_loop(p):
    n = len(p)
    energy = entropy = idm = 0.0
    mu = 0.0
    for g in range(n):
        for d in range(n):
            v = float(p[g][d])
            energy += v * v
            if v > 0:
                entropy -= v * math.log2(v)
            idm += v / (1.0 + (g - d) ** 2)
            mu += g * v
    var = 0.0
    for g in range(n):
        for d in range(n):
            var += (g - mu) ** 2 * float(p[g][d])
    corr = 0.0
    if var > 1e-15:
        for g in range(n):
            for d in range(n):
                corr += (g - mu) * (d - mu) * float(p[g][d]) / var
    contrast = 0.0
    for z in range(n):
        inner = 0.0
        for g in range(n):
            for d in range(n):
                if abs(g - d) == z:
                    inner += float(p[g][d])
        contrast += z * z * inner
    return [energy, entropy, corr, energy, idm, contrast, idm]
