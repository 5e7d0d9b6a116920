"""Dynamic RSA accumulator with trapdoor deletes and membership witnesses.

A digest ``z = g^(x1*...*xn) mod N`` represents a set of prime-encoded
elements. Committee-side code holds the trapdoor ``phi = (p-1)(q-1)``,
which makes deletes and witness generation single exponentiations;
verifiers hold only ``(N, g)`` and check ``w^x mod N == z`` plus the
hash binding of the claimed prime.

Accumulator values mutate in place and are single-writer by contract;
use :meth:`AccumulatorState.clone` to fork an independent copy.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import gmpy2

from .codec import int_to_hex
from .primality import (
    SafePrimeSearchError,
    byte_stream,
    draw_int,
    find_safe_prime,
    is_probable_prime,
    is_safe_prime,
)

PRIME_NONCE_CAP = 1 << 32


class AccumulatorError(Exception):
    pass


class SetupError(AccumulatorError):
    pass


class NotAMemberError(AccumulatorError):
    pass


class DuplicateElementError(AccumulatorError):
    pass


class TrapdoorRequiredError(AccumulatorError):
    """Operation needs phi(N), which this holder does not have."""


class IntegrityError(AccumulatorError):
    """Arithmetic reached a state that should be cryptographically impossible."""


@dataclass(frozen=True)
class AccumulatorParams:
    """Public parameters: modulus (product of two safe primes) and generator."""

    modulus: int
    generator: int
    modulus_bits: int
    setup_seed: bytes

    def to_dict(self) -> dict:
        return {
            "modulus_hex": int_to_hex(self.modulus),
            "generator_hex": int_to_hex(self.generator),
            "modulus_bits": self.modulus_bits,
        }

    @classmethod
    def from_dict(cls, data: dict) -> AccumulatorParams:
        return cls(
            modulus=int(data["modulus_hex"], 16),
            generator=int(data["generator_hex"], 16),
            modulus_bits=int(data["modulus_bits"]),
            setup_seed=b"",
        )


@dataclass(frozen=True)
class Trapdoor:
    """phi(N) = (p-1)(q-1); committee-side secret."""

    phi: int


@dataclass(frozen=True)
class PrimeRepresentation:
    """Prime encoding of an element: ForceOdd(SHA-256(element || nonce))."""

    prime: int
    nonce: int

    def to_dict(self) -> dict:
        return {"prime_hex": int_to_hex(self.prime), "nonce": self.nonce}

    @classmethod
    def from_dict(cls, data: dict) -> PrimeRepresentation:
        return cls(prime=int(data["prime_hex"], 16), nonce=int(data["nonce"]))


@dataclass(frozen=True)
class Witness:
    """Membership witness: value**subject prime == digest (mod N)."""

    value: int
    subject: PrimeRepresentation
    digest: int


def setup(seed: bytes, modulus_bits: int) -> tuple[AccumulatorParams, Trapdoor]:
    """Deterministic trusted setup: same (seed, bits) always yields same (N, g).

    The two safe primes come from independent domain-separated candidate
    streams; the generator is the square of a stream-drawn residue.
    """
    if modulus_bits < 16:
        raise SetupError("modulus must be at least 16 bits")
    p_bits = modulus_bits - modulus_bits // 2
    q_bits = modulus_bits // 2
    try:
        p = find_safe_prime(seed, p_bits, b"prime:p")
        q = find_safe_prime(seed, q_bits, b"prime:q")
    except SafePrimeSearchError as exc:
        raise SetupError(str(exc)) from exc
    if p == q:
        raise SetupError(f"{modulus_bits}-bit setup cannot host two distinct safe primes")
    return _assemble(p, q, seed, modulus_bits, generator=None)


def params_from_factors(
    p: int, q: int, generator: int | None = None, seed: bytes = b""
) -> tuple[AccumulatorParams, Trapdoor]:
    """Build params from explicit factors (test and preset path).

    Validates that both factors are safe primes; the generator, when
    given, must be a quadratic residue and is checked against the factors.
    """
    if not is_safe_prime(p) or not is_safe_prime(q):
        raise SetupError("both factors must be safe primes")
    if p == q:
        raise SetupError("factors must be distinct")
    return _assemble(p, q, seed, (p * q).bit_length(), generator)


def _assemble(
    p: int, q: int, seed: bytes, modulus_bits: int, generator: int | None
) -> tuple[AccumulatorParams, Trapdoor]:
    modulus = p * q
    if generator is None:
        generator = _derive_generator(seed, modulus)
    else:
        if generator in (0, 1) or math.gcd(generator, modulus) != 1:
            raise SetupError("generator must be a unit other than 0 and 1")
        # Euler criterion against both factors: residue iff residue mod p and q.
        if (
            gmpy2.powmod(generator, (p - 1) // 2, p) != 1
            or gmpy2.powmod(generator, (q - 1) // 2, q) != 1
        ):
            raise SetupError("generator is not a quadratic residue")
    params = AccumulatorParams(
        modulus=modulus, generator=generator, modulus_bits=modulus_bits, setup_seed=seed
    )
    return params, Trapdoor(phi=(p - 1) * (q - 1))


def _derive_generator(seed: bytes, modulus: int) -> int:
    stream = byte_stream(seed, b"generator")
    nbytes = (modulus.bit_length() + 7) // 8
    while True:
        r = draw_int(stream, nbytes) % modulus
        if r < 2 or math.gcd(r, modulus) != 1:
            continue
        g = int(gmpy2.powmod(r, 2, modulus))
        if g not in (0, 1):
            return g


def hash_to_prime(element: bytes, phi: int | None = None) -> PrimeRepresentation:
    """Least-nonce prime encoding of an element.

    Candidate = SHA-256(element || nonce_be8) as a big-endian integer with
    the low bit forced to 1. When the caller holds phi, nonces whose prime
    divides phi are skipped so trapdoor inverses always exist.
    """
    if not element:
        raise ValueError("element must be non-empty")
    for nonce in range(PRIME_NONCE_CAP):
        candidate = _prime_candidate(element, nonce)
        if is_probable_prime(candidate):
            if phi is not None and phi % candidate == 0:
                continue
            return PrimeRepresentation(prime=candidate, nonce=nonce)
    raise AccumulatorError("nonce search exhausted without finding a prime")


def _prime_candidate(element: bytes, nonce: int) -> int:
    digest = hashlib.sha256(element + nonce.to_bytes(8, "big")).digest()
    return int.from_bytes(digest, "big") | 1


def check_representation(element: bytes, rep: PrimeRepresentation) -> bool:
    """Hash binding plus primality; verifiers do not re-check nonce minimality."""
    if rep.nonce < 0 or rep.nonce >= PRIME_NONCE_CAP:
        return False
    if rep.prime != _prime_candidate(element, rep.nonce):
        return False
    return is_probable_prime(rep.prime)


def verify_exponent(params: AccumulatorParams, digest: int, prime: int, witness: int) -> bool:
    """The bare verification equation: witness**prime mod N == digest."""
    if not (0 < witness < params.modulus and 0 < digest < params.modulus):
        return False
    if prime < 2:
        return False
    return gmpy2.powmod(witness, prime, params.modulus) == digest


def verify_membership(
    params: AccumulatorParams,
    digest: int,
    element: bytes,
    rep: PrimeRepresentation,
    witness: int,
) -> bool:
    """Full trapdoor-free membership check.

    True iff the claimed prime is hash-bound to the element, passes
    primality, and satisfies the verification equation against ``digest``.
    """
    if not check_representation(element, rep):
        return False
    return verify_exponent(params, digest, rep.prime, witness)


@dataclass
class AccumulatorState:
    """Digest plus the element -> prime map needed to maintain it."""

    params: AccumulatorParams
    trapdoor: Trapdoor | None = None
    digest: int = 0
    members: dict[bytes, PrimeRepresentation] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.digest == 0:
            self.digest = self.params.generator

    @property
    def phi(self) -> int | None:
        return self.trapdoor.phi if self.trapdoor else None

    def clone(self) -> AccumulatorState:
        return AccumulatorState(
            params=self.params,
            trapdoor=self.trapdoor,
            digest=self.digest,
            members=dict(self.members),
        )

    def representation_for(self, element: bytes) -> PrimeRepresentation:
        rep = self.members.get(element)
        if rep is None:
            rep = hash_to_prime(element, self.phi)
        return rep

    def add(self, element: bytes, rep: PrimeRepresentation | None = None) -> AccumulatorState:
        """Fold an element in: z <- z**x mod N. Duplicate adds are a caller bug."""
        if element in self.members:
            raise DuplicateElementError(f"element already accumulated: {element!r}")
        if rep is None:
            rep = hash_to_prime(element, self.phi)
        self.digest = int(gmpy2.powmod(self.digest, rep.prime, self.params.modulus))
        self.members[element] = rep
        return self

    def delete(self, element: bytes) -> AccumulatorState:
        """Remove an element via the trapdoor: z <- z**(x^-1 mod phi) mod N."""
        rep = self.members.get(element)
        if rep is None:
            raise NotAMemberError(f"element not accumulated: {element!r}")
        if self.trapdoor is None:
            raise TrapdoorRequiredError("delete requires the trapdoor")
        inverse = gmpy2.invert(rep.prime, self.trapdoor.phi)
        self.digest = int(gmpy2.powmod(self.digest, inverse, self.params.modulus))
        del self.members[element]
        return self

    def witness(self, element: bytes) -> Witness:
        """Membership witness for a current member (trapdoor path)."""
        rep = self.members.get(element)
        if rep is None:
            raise NotAMemberError(f"element not accumulated: {element!r}")
        if self.trapdoor is None:
            raise TrapdoorRequiredError("witness generation requires the trapdoor")
        return Witness(
            value=witness_from_digest(self.params, self.trapdoor, self.digest, rep.prime),
            subject=rep,
            digest=self.digest,
        )


def witness_from_digest(
    params: AccumulatorParams, trapdoor: Trapdoor, digest: int, prime: int
) -> int:
    """w = digest**(prime^-1 mod phi) mod N; the accumulator without the element."""
    inverse = gmpy2.invert(prime, trapdoor.phi)
    return int(gmpy2.powmod(digest, inverse, params.modulus))


def accumulate(params: AccumulatorParams, primes: list[int]) -> int:
    """Direct re-exponentiation g**(x1*...*xn) mod N, one prime at a time.

    Independent of the incremental path; used as the reference oracle.
    """
    z = gmpy2.mpz(params.generator)
    for x in primes:
        z = gmpy2.powmod(z, x, params.modulus)
    return int(z)


def update_witness_add(w: Witness, added_prime: int, new_digest: int, params: AccumulatorParams) -> Witness:
    """After an add, a holder updates its witness by w <- w**x' mod N."""
    return Witness(
        value=int(gmpy2.powmod(w.value, added_prime, params.modulus)),
        subject=w.subject,
        digest=new_digest,
    )


def update_witness_delete(
    w: Witness, deleted_prime: int, new_digest: int, params: AccumulatorParams
) -> Witness:
    """After a delete, update without the trapdoor via Bezout coefficients.

    With a*x + b*x' = 1 for subject prime x and deleted prime x', the new
    witness is w**b * z'**a mod N. Negative b is handled by inverting w,
    which must be a unit; a non-invertible w would expose a factor of N.
    """
    x = w.subject.prime
    g, a, b = gmpy2.gcdext(x, deleted_prime)
    if g != 1:
        raise ArithmeticError("subject and deleted primes must be coprime")
    n = params.modulus
    if b >= 0:
        w_part = gmpy2.powmod(w.value, b, n)
    else:
        if math.gcd(w.value, n) != 1:
            raise IntegrityError("witness shares a factor with the modulus")
        w_part = gmpy2.powmod(gmpy2.invert(w.value, n), -b, n)
    if a >= 0:
        z_part = gmpy2.powmod(new_digest, a, n)
    else:
        if math.gcd(new_digest, n) != 1:
            raise IntegrityError("digest shares a factor with the modulus")
        z_part = gmpy2.powmod(gmpy2.invert(new_digest, n), -a, n)
    return Witness(value=int(w_part * z_part % n), subject=w.subject, digest=new_digest)
