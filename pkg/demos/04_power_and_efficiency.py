# coding: utf-8

# # Hardware power and energy efficiency
#
# Power is a device count times a per-device figure, summed over power
# amplifiers, combiners, phase shifters, RF chains, DACs and baseband.
# The architectures differ mostly in their phase-shifter count.

# %%

from wsms import ARCHITECTURES, PowerModel, ScenarioConfig, run_sweep

m = PowerModel()
print(f"{'arch':<8} {'PA':>4} {'PC':>4} {'PS':>5} {'RF':>4} {'DAC':>4}  mW")
for arch in ARCHITECTURES:
    l = 64 if arch == "digital" else 8
    c = m.device_counts(arch, 64, l, 4)
    print(f"{arch:<8} {c['pa']:>4} {c['pc']:>4} {c['ps']:>5} {c['rf']:>4} {c['dac']:>4}  {m.consumption_mw(arch, 64, l, 4):.1f}")

# %% [markdown]
# Energy efficiency is SE x bandwidth over total power (both terminals
# plus the radiated power).  The sweep module evaluates every
# architecture on the same scenario.

# %%

res = run_sweep(ScenarioConfig(), ["rho=0:30:10"], ("wsms", "planar-baseline", "aosa", "los-mimo"))
print(f"{'rho':>4} {'arch':<16} {'k':>2} {'SE':>7} {'P (W)':>7} {'EE (Gbit/J)':>11}")
for r in res.rows:
    print(f"{r.rho_dbm:>4.0f} {r.architecture:<16} {r.k:>2} {r.se:7.3f} {r.power_w:7.3f} {r.ee / 1e9:11.3f}")
