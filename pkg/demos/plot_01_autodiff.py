"""
Reverse-mode gradients and finite differences
==============================================

Build a small expression with the tensor type, backpropagate, and compare the
result against central differences.
"""

import numpy as np

from lclab import diffcore as dc

rng = np.random.default_rng(0)

# a two-layer map followed by a log-sum-exp readout
x = rng.normal(size=(5, 3))
w1 = dc.Tensor(rng.normal(size=(3, 4)), requires_grad=True, name="w1")
w2 = dc.Tensor(rng.normal(size=(4, 2)), requires_grad=True, name="w2")


def f(params):
    h = dc.relu(dc.matmul(x, params[0]))
    return dc.mean(dc.logsumexp(dc.matmul(h, params[1])))


loss = f([w1, w2])
loss.backward()
print("loss", loss.item())
print("d loss / d w2\n", w2.grad)

# the check perturbs a sample of coordinates by +-1e-5
report = dc.finite_diff_check(f, [w1, w2])
print("max relative error per block:", report.max_rel_error)

# one Adam step with decoupled weight decay
state = dc.AdamState(lr=1e-2, weight_decay=1e-2)
dc.adam_step(state, [w1, w2])
print("after one step, loss =", f([w1, w2]).item())
