"""Frozen parameter presets.

The 2048-bit demo modulus below is the output of
``setup(DEMO_SEED_2048, 2048)``, frozen so benchmarks and large-modulus
tests do not pay the safe-prime search on every run. Both factors are
public here, so this preset must never back a real deployment; its
trapdoor is world-readable by design.
"""

from __future__ import annotations

from .accumulator import AccumulatorParams, Trapdoor, params_from_factors

DEMO_SEED_2048 = b"ledgerscope-demo-2048-v1"

_DEMO_P_2048 = int(
    "0xcb80516897809ad7f4f9ee3119fa848c26e9d7cc708d903fa82b16e9608788c8"
    "9e41382b129a8a6293238859ddd53217a0a4ab0343f4bc6edd95902521c5a1ae"
    "9db118dc11f80bdb8f239924edd343c822f916e7c86765421fab97e869953b52"
    "a7fcc75d69e65ebab231a7156635897932cdfcbd1b873ed5b51e64d4fe0a934f",
    16,
)

_DEMO_Q_2048 = int(
    "0xc5f9a3cc955145e8ddd3837e03797a3464b0af4a548c590d15229ccde77341cd"
    "c3b50cbba5ef2e4a2ca7b688c0a7fd25bbf2924a1cabb4c979090b0bb03d21e7"
    "2e8f0fce69f0ac3e2bb07090fc8fbba5dcec7ce0e0fb5c0f1c58cf7c8ad8cc8c"
    "84b9f0d14a713a3ea300b864a8af6ecf6f58fd6eae08e6f07470cfeb6d77afab",
    16,
)

_DEMO_G_2048 = int(
    "0x4dd93782ca392cfc4d05571453c4e4e1d020f3b77a105d0cbd53eacda3b170c8"
    "c015afde4971735382a968f80951b23f792f8aa031e26eea1427c497aa93e863"
    "b850f2051d8a9ec947adbbd105af02a6f62fabc9066446f8c87e18262b234fe1"
    "a73641224da264c9a6a92e3488e509f939737097a178b61bd4f00bb2ec3576a1"
    "be9e9052d967ec91efddcbbec89881a948b60916d664b50f054165bb358dad55"
    "9379b8d4698e449a42b14a969f2bde3fcb78ea779439f26695fd8b1fdd3bc2ed"
    "d278f6354283b9084b29cc9a398437ae6a081f0dba8db31431d93d65cc686e8b"
    "b22ebc135206cccb14045406b9b241149ea4bd9f8f607c92288651dc7dd718fa",
    16,
)

TOY_P = 23
TOY_Q = 47
TOY_GENERATOR = 4


def demo_params_2048() -> tuple[AccumulatorParams, Trapdoor]:
    """2048-bit demo parameters with a publicly known trapdoor."""
    return params_from_factors(
        _DEMO_P_2048, _DEMO_Q_2048, generator=_DEMO_G_2048, seed=DEMO_SEED_2048
    )


def toy_params() -> tuple[AccumulatorParams, Trapdoor]:
    """The tiny hand-checkable group: N = 1081 = 23 * 47, g = 4."""
    return params_from_factors(TOY_P, TOY_Q, generator=TOY_GENERATOR, seed=b"toy")
