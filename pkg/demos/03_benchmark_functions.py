"""
Benchmark functions and the percentile split
=============================================

Rows whose every variable lies inside its 5-95 percentile band are used for
training; the outer shell is the out-of-distribution test set.
"""
import numpy as np

from polymnn import baselines, benchmarks, metrics, mnn
from polymnn.trainer import TrainConfig, train

for name, fn in benchmarks.BENCHMARKS.items():
    print(f"{name:16s} arity {fn.arity}  order {fn.order}  domain {list(fn.domain)}")

print("Currin(0, 0) =", benchmarks.eval_benchmark("Currin", [0.0, 0.0]))

train_set, test_set = benchmarks.split_datasets("Lim", 20_000, seed=0)
print(f"Lim: {len(train_set)} training rows, {len(test_set)} shell rows")

# a 5th order CCP against a random forest, both fit on the inner box
config = TrainConfig(epochs=20, seed=0)
ccp, hist = train(mnn.build("CCP", 2, 64, 1, 5, rng=0), train_set, config)
fit_rows, _ = train_set.split_tail(0.2)
rf = baselines.fit_random_forest(fit_rows, seed=0)

for label, model in (("CCP", ccp), ("RF", rf)):
    print(f"{label}: test RRSE {metrics.rrse(test_set.y, model.predict(test_set.X)):.4g}")

# Trees cannot predict outside the range of targets they were fit on, while the
# polynomial network follows the function into the shell.
edge = np.array([[0.0, 0.0], [1.0, 1.0]])
print("true", benchmarks.eval_benchmark("Lim", edge), "CCP", ccp.predict(edge)[:, 0], "RF", rf.predict(edge))
