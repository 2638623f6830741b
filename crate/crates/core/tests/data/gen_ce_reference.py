"""Reference cross-entropy values at 300 significant digits.

Regenerate with: python3 gen_ce_reference.py > ce_reference.json
"""
import json
import random

from mpmath import mp, mpf, exp, log

# Logit gaps reach ~400, so e^-400 ~ 1e-174 must survive next to 1.
mp.dps = 300
rng = random.Random(20240611)
cases = []
for i in range(300):
    kind = i % 5
    if kind == 0:
        logits = [round(rng.uniform(-5, 5), 6) for _ in range(6)]
    elif kind == 1:
        logits = [round(rng.uniform(-200, 200), 4) for _ in range(6)]
    elif kind == 2:
        logits = [round(rng.gauss(0, 1e-3), 9) for _ in range(6)]
    elif kind == 3:
        logits = [round(rng.uniform(-3, 3), 6) for _ in range(6)]
    else:
        logits = [round(rng.uniform(-1, 1) + 800, 6) for _ in range(6)]
    gold = rng.randrange(6)
    if kind == 3:
        logits[gold] += 25.0
        logits[gold] = round(logits[gold], 6)
    lse = log(sum(exp(mpf(repr(x))) for x in logits))
    ce = lse - mpf(repr(logits[gold]))
    cases.append({"logits": logits, "gold": gold, "ce": mp.nstr(ce, 30)})
print(json.dumps(cases))
