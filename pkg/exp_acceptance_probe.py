"""Development probe for the acceptance-criterion experiments (not shipped)."""
import time

import numpy as np

from triagelab import metrics, scenario
from triagelab.trainer import TrainConfig, train, evaluate

profile = scenario.bundled_profile("eclipse_like")
t_start = time.time()

print("=== convergence protocol: N=2000 M=100 O=30, three variants ===", flush=True)
endpoints = {}
for rule in ("constant", "harmonic", "bakf"):
    t0 = time.time()
    cfg = TrainConfig(iterations=2000, eval_every=100, eval_epochs=30,
                      eval_replications=30, stepsize=rule, seed=7, epsilon=0.75)
    report = train(profile, cfg)
    first = report.eval_series[0].mean
    last = report.eval_series[-1].mean
    trace = report.value_traces["bug_t0_type0_due3"]
    endpoints[rule] = trace[-1]
    print(f"{rule:9s}: iter0 {first:.1f} -> final {last:.1f} "
          f"({'OK' if last < first else 'FAIL'}) trace_end {trace[-1]:.3f} "
          f"tail_sd {np.std(trace[-200:]):.3f} [{time.time()-t0:.0f}s]", flush=True)
    if rule == "bakf":
        report.save("/tmp/bakf_run")
spread = (max(endpoints.values()) - min(endpoints.values())) / min(endpoints.values())
print(f"trace endpoints: {endpoints} spread {100*spread:.1f}% "
      f"({'OK' if spread <= 0.10 else 'FAIL'})", flush=True)

print("=== gamma sensitivity ===", flush=True)
from dataclasses import replace
for gamma in (0.99, 0.9):
    t0 = time.time()
    cfg = TrainConfig(iterations=1200, eval_every=10**9, eval_epochs=30,
                      eval_replications=30, stepsize="bakf", seed=7,
                      epsilon=0.75, gamma=gamma)
    report = train(profile, cfg)
    prof_g = replace(profile, discount=gamma)
    myo = evaluate(prof_g, "myopic", epochs=30, replications=30,
                   seed=report.config.eval_seed)
    final = report.eval_series[-1].mean
    rel = (myo.mean - final) / myo.mean
    print(f"gamma={gamma}: adp final {final:.1f} vs myopic {myo.mean:.1f} "
          f"improvement {100*rel:+.1f}% [{time.time()-t0:.0f}s]", flush=True)

print("=== exploration effect: eps 0.75 vs 0, 10 seeds, N=400 ===", flush=True)
wins = 0
means = {0.75: [], 0.0: []}
for s in range(10):
    res = {}
    for eps in (0.75, 0.0):
        cfg = TrainConfig(iterations=400, eval_every=10**9, eval_epochs=30,
                          eval_replications=20, stepsize="bakf",
                          seed=100 + s, epsilon=eps)
        report = train(profile, cfg)
        res[eps] = report.eval_series[-1].mean
        means[eps].append(res[eps])
    wins += res[0.75] < res[0.0]
    print(f"seed {100+s}: eps0.75 {res[0.75]:.1f} vs eps0 {res[0.0]:.1f} "
          f"{'WIN' if res[0.75] < res[0.0] else 'LOSS'}", flush=True)
print(f"exploration wins {wins}/10; means {np.mean(means[0.75]):.1f} vs "
      f"{np.mean(means[0.0]):.1f}", flush=True)

print("=== cost-function insensitivity: linear vs exponential ===", flush=True)
top1 = {}
for kind in ("linear", "exponential"):
    prof_k = replace(profile, postponement_cost_kind=kind)
    cfg = TrainConfig(iterations=1200, eval_every=10**9, eval_epochs=30,
                      eval_replications=30, stepsize="bakf", seed=7, epsilon=0.75)
    report = train(prof_k, cfg)
    ev = evaluate(prof_k, report.store, epochs=30, replications=30, seed=4242)
    top1[kind] = metrics.top_k_accuracy(ev.logs, prof_k, 1)
    print(f"{kind}: top-1 {top1[kind]:.2f}", flush=True)
print(f"top-1 delta {abs(top1['linear'] - top1['exponential']):.2f}pp "
      f"({'OK' if abs(top1['linear'] - top1['exponential']) < 2 else 'FAIL'})", flush=True)
print(f"total {time.time()-t_start:.0f}s", flush=True)
