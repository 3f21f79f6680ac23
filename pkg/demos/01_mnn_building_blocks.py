"""
Multiplicative networks: building blocks and their sizes
=========================================================

Four building blocks raise their inputs to a fixed polynomial order with
element-wise products instead of a nonlinear activation.
"""
import numpy as np

from polymnn import metamodel, mnn, sir

# a tiny CCP of order 2 with hand-set weights computes z^2 exactly:
# x1 = z, x2 = (z - 1) * x1 + x1
net = mnn.build("CCP", 1, 1, 1, 2, rng=0)
net.params["U1"][...] = 1.0
net.params["U1_b"][...] = 0.0
net.params["U2"][...] = 1.0
net.params["U2_b"][...] = -1.0
net.params["C"][...] = 1.0
net.params["C_b"][...] = 0.0
z = np.array([[-3.0, 0.5, 2.0, 100.0]])
print("CCP(z) =", net.forward(z)[0], " z^2 =", z[0] ** 2)

# because the map is a polynomial it keeps the same shape far from any data
print("z = 1e3 ->", net.forward(np.array([1e3]))[0])

# the lag L folds L simulator steps into one prediction, so the order grows
for L in range(1, 6):
    print(f"L={L}: order {sir.polynomial_order_for_lag(L)}")

# parameter counts of the three-network SIR metamodel (5 inputs, 64 hidden units)
print(f"{'':8s}" + "".join(f"{'L=' + str(L):>9s}" for L in range(1, 6)))
for kind in mnn.KINDS:
    counts = [metamodel.build_metamodel(kind, L, rng=0).param_count for L in range(1, 6)]
    print(f"{kind:8s}" + "".join(f"{mnn.format_count(c):>9s}" for c in counts))

# PANN only has one hidden layer with an x^n activation, so its size does not move
# with the order; PDC adds a full hidden layer per order and grows fastest.
