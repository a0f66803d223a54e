#!/usr/bin/env python3
"""Benchmark the two curve kernels (compiled vs pure-Python).

The signature path dominates end-to-end ledger throughput, so this compares
base multiplication, signing and verification across:

  * the compiled Cython kernel (if built)
  * the pure-Python fallback kernel
  * OpenSSL via the `cryptography` package, for reference

Run:  python benchmarks/bench_ecc.py [--iterations N]
"""

import argparse
import random
import time


def _bench(fn, iterations):
    t0 = time.perf_counter()
    for _ in range(iterations):
        fn()
    return (time.perf_counter() - t0) / iterations * 1e6  # us/op


def bench_kernel(kernel, ecdsa_mod, iterations, rng):
    from medledger.crypto import params

    scalars = [rng.randrange(1, params.N) for _ in range(iterations)]
    it = iter(scalars)
    base_us = _bench(lambda: kernel.mul_base(next(it)), iterations)

    kp = ecdsa_mod.gen_sig_keypair(random.Random(1))
    msgs = [rng.randbytes(100) for _ in range(iterations)]
    msg_iter = iter(msgs)
    sign_us = _bench(lambda: ecdsa_mod.sign(kp.private, next(msg_iter)), iterations)

    sigs = [ecdsa_mod.sign(kp.private, m) for m in msgs]
    pairs = iter(zip(msgs, sigs))
    verify_us = _bench(lambda: ecdsa_mod.verify(kp.public, *next(pairs)), iterations)
    return base_us, sign_us, verify_us


def bench_openssl(iterations, rng):
    from cryptography.hazmat.primitives import hashes
    from cryptography.hazmat.primitives.asymmetric import ec

    priv = ec.derive_private_key(0x1234567890ABCDEF, ec.SECP256K1())
    pub = priv.public_key()
    algo = ec.ECDSA(hashes.SHA256(), deterministic_signing=True)
    msgs = [rng.randbytes(100) for _ in range(iterations)]

    it = iter(msgs)
    sign_us = _bench(lambda: priv.sign(next(it), algo), iterations)
    sigs = [priv.sign(m, algo) for m in msgs]
    pairs = iter(zip(msgs, sigs))

    def _verify_one():
        m, s = next(pairs)
        pub.verify(s, m, ec.ECDSA(hashes.SHA256()))

    verify_us = _bench(_verify_one, iterations)
    return sign_us, verify_us


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=300)
    args = parser.parse_args()

    import medledger.crypto.backend as backend_mod
    from medledger.crypto import _secp256k1_py as pure_kernel
    from medledger.crypto import ecdsa

    rng = random.Random(42)
    rows = []

    try:
        from medledger.crypto import _secp256k1 as fast_kernel
    except ImportError:
        fast_kernel = None

    # patch the ecdsa module's kernel per run so sign/verify use the right one
    original = backend_mod.kernel
    try:
        if fast_kernel is not None:
            ecdsa.kernel = fast_kernel
            rows.append(("cython",) + bench_kernel(fast_kernel, ecdsa, args.iterations, rng))
        ecdsa.kernel = pure_kernel
        pure_iters = max(10, args.iterations // 10)
        rows.append(("pure-python",) + bench_kernel(pure_kernel, ecdsa, pure_iters, rng))
    finally:
        ecdsa.kernel = original

    ssl_sign, ssl_verify = bench_openssl(args.iterations, rng)
    rows.append(("openssl (ref)", float("nan"), ssl_sign, ssl_verify))

    print(f"{'kernel':<14} {'mul_base us':>12} {'sign us':>10} {'verify us':>10}")
    for name, base_us, sign_us, verify_us in rows:
        base = f"{base_us:12.1f}" if base_us == base_us else " " * 11 + "-"
        print(f"{name:<14} {base} {sign_us:10.1f} {verify_us:10.1f}")

    if fast_kernel is not None:
        cy = rows[0]
        py = rows[1]
        print(f"\ncython speedup over pure-python: "
              f"mul_base {py[1] / cy[1]:.1f}x, sign {py[2] / cy[2]:.1f}x, verify {py[3] / cy[3]:.1f}x")


if __name__ == "__main__":
    main()
