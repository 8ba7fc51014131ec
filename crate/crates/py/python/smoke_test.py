import math

import cqsp_py

ch = cqsp_py.Channel.preset("bsc", p=0.1)
print(ch)
assert abs(ch.capacity - 0.368064) < 1e-5, ch.capacity
assert ch.r_inf == 0.0

esp, s = ch.esp(0.2)
assert abs(esp - 0.0402923655) < 1e-8 and abs(s - 0.5484926560) < 1e-8, (esp, s)
assert math.isinf(ch.esp(0.0)[0]) or ch.esp(0.0)[0] > 0

report = ch.sp_bound(0.2, 1000)
print({k: report[k] for k in ("rate_n", "esp_rn", "log_direct_bound", "valid")})
assert report["thresholds"][0] == 62.0

rho = [[0.9, 0.0], [0.0, 0.1]]
sigma = [[0.5, 0.0], [0.0, 0.5]]
assert abs(cqsp_py.petz_renyi(rho, rho, 0.5)) < 1e-12
alpha, t = cqsp_py.min_type1(rho, sigma, 0.5)
assert abs(alpha - 0.1) < 1e-9, alpha

tail = cqsp_py.exact_tail([0.0, 1.0], [0.5, 0.5], 4, 0.5)
assert abs(tail - 11 / 16) < 1e-12, tail

alpha_hat = ch.min_type1_product([1, 2, 1], sigma, 0.1)
assert 0.0 <= alpha_hat <= 1.0

try:
    cqsp_py.Channel.preset("nope")
except cqsp_py.CqspError as e:
    print("error:", e)
    assert str(e).startswith("[")
else:
    raise AssertionError("expected CqspError")

print("smoke test ok")
