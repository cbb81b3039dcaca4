"""The reverse-mode gradient engine the models train on.

A loss is built from tensor ops, one backward() call fills every gradient,
and central finite differences confirm the result.  The same Adam + clipping
step the trainers use then walks a tiny regression problem downhill.
"""
import numpy as np

from blendtrace import nd
from blendtrace.nd import AdamHyper, AdamState, Tensor


def main() -> None:
    rng = nd.substream(0, "demo")
    w = Tensor(rng.normal(size=(3, 4)) * 0.3, requires_grad=True)
    v = Tensor(rng.normal(size=(4, 2)) * 0.3, requires_grad=True)
    x = Tensor(rng.normal(size=(5, 3)))
    gold = np.array([0, 1, 1, 0, 1])

    def loss_fn() -> Tensor:
        return nd.cross_entropy_logits(nd.tanh(x @ w) @ v, gold)

    loss = loss_fn()
    nd.backward(loss)
    print(f"loss on random parameters: {loss.item():.6f}")
    print(f"dloss/dw[0,0] from backward(): {w.grad[0, 0]:+.10f}")

    err = nd.max_gradcheck_error(loss_fn, {"w": w, "v": v})
    print(f"max relative error vs central finite differences: {err:.2e}\n")

    adam = AdamState(hyper=AdamHyper(lr=0.05))
    params = {"w": w, "v": v}
    print("twenty Adam steps on the same loss:")
    for step in range(1, 21):
        loss = loss_fn()
        nd.zero_grads(params)
        nd.backward(loss)
        nd.clip_global_norm(params, 5.0)
        nd.adam_step(params, adam)
        if step % 5 == 0:
            print(f"  step {step:2d}: loss {loss.item():.6f}")


if __name__ == "__main__":
    main()
