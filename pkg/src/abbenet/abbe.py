"""Ciphertext-policy attribute-based broadcast KEM with user revocation.

The scheme works over an asymmetric pairing e: G1 x G2 -> GT of prime
order r. A master secret (gamma, omega, {delta_a}) blinds a shared session
value; every user u gets a deterministic identity scalar x_u = H(user id)
and a private key living at 1/(gamma + x_u):

    A_u = omega/(gamma+x_u) . g1
    B_u = 1/(gamma+x_u) . g1
    F_{u,a} = delta_a/(gamma+x_u) . g1        (one per attribute)

i.e. exactly 2 + n G1 elements, each costing one scalar multiplication.

The public key carries Y_i = gamma^i . g2 (i = 0..N, N = registry size),
W_u = (gamma+x_u) . g1 per user, and GT constants Omega = e(g1,g2)^omega
and Omega_a = e(g1,g2)^delta_a. Attribute components are published in GT,
not G1: a G1 exponent of delta_a would let anyone pair it with the header
and recompute session material without a key.

Encapsulation for policy (T, R) with revocation polynomial
F_R(X) = prod_{j in R} (X + x_j) draws one fresh scalar s and emits

    C0 = s . g2
    C1 = s gamma . g2
    C_rev = s F_R(gamma) . g2                 (expanded over the Y_i)
    D_j = s F_{R \\ {j}}(gamma) . g2           (one per revoked user)

which is k + 3 G2 elements; the session value is
V = (Omega * prod_{a in T} Omega_a)^s and the symmetric key is
SHA-256("abbe-kem-v1" || canonical encoding of V).

Decapsulation enforces the policy structurally (attributes and the revoked
list are public header fields), then performs exactly three pairings:
P1 = e(A_u + sum_{a in T} F_{u,a}, C1 + x_u C0) recovers V for any key
whose attribute set covers T, and P2 = e(g1, C_rev) versus
P3 = e(W_j*, D_j*) (j* the first revoked id; e(g1, C0) when none) verifies
that the header's revocation elements are mutually consistent, since
(gamma + x_j) F_{R\\{j}}(gamma) = F_R(gamma). Revocation is thus enforced
at the API and the header is checked for internal consistency; the
underlying collusion-resistance argument of the original construction is
a proof property and is not claimed by this code.
"""

import hashlib
from dataclasses import dataclass, field

from gmpy2 import invert

from .errors import (
    DuplicateUser,
    InvalidHeader,
    MismatchedCurve,
    NotAuthorized,
    UnknownAttribute,
    UnknownRevokedUser,
    UnknownUser,
)
from .pairing import (
    G1Element,
    G2Element,
    GTElement,
    g1_generator,
    g2_generator,
    group_add,
    gt_generator,
    hash_to_scalar,
    pair,
    random_scalar,
    scalar_mul,
)

KDF_TAG = b"abbe-kem-v1"
USER_ID_TAG = b"abbe-user-v1:"
MAX_ATTRIBUTE_BYTES = 64
SESSION_KEY_BYTES = 32


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    attributes: tuple

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))


@dataclass(frozen=True)
class AccessPolicy:
    required_attributes: frozenset
    revoked_users: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(
            self, "required_attributes", frozenset(self.required_attributes)
        )
        object.__setattr__(self, "revoked_users", frozenset(self.revoked_users))


@dataclass(frozen=True)
class UserPrivateKey:
    user_id: str
    attributes: tuple  # universe order; elements[2 + i] matches attributes[i]
    elements: tuple    # (A, B, F_a...) as G1 elements


@dataclass(frozen=True)
class AbbeHeader:
    policy: AccessPolicy
    elements: tuple  # (C0, C1, C_rev, D_j...) as G2 elements, D's by sorted id

    @property
    def revoked_order(self):
        return tuple(sorted(self.policy.revoked_users))


@dataclass
class MasterSecretKey:
    curve: object
    gamma: int
    omega: int
    delta: dict            # attribute -> scalar
    universe: tuple
    registry: dict = field(repr=False)  # user_id -> frozenset of attributes


@dataclass
class MasterPublicKey:
    curve: object
    universe: tuple
    user_ids: tuple
    y: tuple               # Y_i = gamma^i . g2, i = 0..N
    w: dict                # user_id -> W_u
    omega: GTElement
    attr_omega: dict       # attribute -> Omega_a

    @property
    def public_elements(self) -> tuple:
        """Every group element of the key, flattened (for membership audits)."""
        return (
            tuple(self.y)
            + tuple(self.w[u] for u in self.user_ids)
            + (self.omega,)
            + tuple(self.attr_omega[a] for a in self.universe)
        )


def user_scalar(curve, user_id: str) -> int:
    """The deterministic identity scalar x_u."""
    return hash_to_scalar(curve, USER_ID_TAG + user_id.encode())


def validate_universe(universe) -> tuple:
    names = tuple(universe)
    seen = set()
    for name in names:
        if not isinstance(name, str) or not name:
            raise UnknownAttribute("attribute names must be non-empty strings")
        if len(name.encode()) > MAX_ATTRIBUTE_BYTES:
            raise UnknownAttribute(f"attribute name too long: {name[:32]}...")
        if name in seen:
            raise UnknownAttribute(f"duplicate attribute: {name}")
        seen.add(name)
    return names


def policy_satisfies(policy: AccessPolicy, user: UserRecord) -> bool:
    """The brute-force authorization predicate all KEM behavior is tested
    against: AND over required attributes, minus revoked users."""
    return set(policy.required_attributes) <= set(user.attributes) and (
        user.user_id not in policy.revoked_users
    )


def setup(curve, universe, registry, rng):
    """Derive master keys for a fixed attribute universe and user registry.

    Draws gamma, omega and one delta per attribute from rng in a fixed
    order, so a seeded rng reproduces the key pair bit for bit.
    """
    names = validate_universe(universe)
    name_set = set(names)
    users = {}
    for record in registry:
        if record.user_id in users:
            raise DuplicateUser(record.user_id)
        if not record.attributes:
            raise UnknownAttribute(
                f"user {record.user_id} has an empty attribute set"
            )
        unknown = set(record.attributes) - name_set
        if unknown:
            raise UnknownAttribute(
                f"user {record.user_id} uses {sorted(unknown)} outside the universe"
            )
        users[record.user_id] = frozenset(record.attributes)

    r = int(curve.r)
    gamma = random_scalar(curve, rng)
    omega = random_scalar(curve, rng)
    delta = {a: random_scalar(curve, rng) for a in names}

    g1 = g1_generator(curve)
    g2 = g2_generator(curve)
    egg = gt_generator(curve)

    y = []
    power = 1
    for _ in range(len(users) + 1):
        y.append(scalar_mul(power, g2))
        power = power * gamma % r
    w = {
        uid: scalar_mul((gamma + user_scalar(curve, uid)) % r, g1)
        for uid in users
    }

    mpk = MasterPublicKey(
        curve=curve,
        universe=names,
        user_ids=tuple(users),
        y=tuple(y),
        w=w,
        omega=scalar_mul(omega, egg),
        attr_omega={a: scalar_mul(delta[a], egg) for a in names},
    )
    msk = MasterSecretKey(
        curve=curve,
        gamma=gamma,
        omega=omega,
        delta=dict(delta),
        universe=names,
        registry=users,
    )
    return mpk, msk


def keygen(msk: MasterSecretKey, user: UserRecord) -> UserPrivateKey:
    """Private key for a registered user: exactly 2 + n scalar multiplications."""
    registered = msk.registry.get(user.user_id)
    if registered is None or frozenset(user.attributes) != registered:
        raise UnknownUser(user.user_id)
    curve = msk.curve
    r = int(curve.r)
    x_u = user_scalar(curve, user.user_id)
    inv = int(invert((msk.gamma + x_u) % r, r))
    g1 = g1_generator(curve)

    attrs = tuple(a for a in msk.universe if a in registered)
    elements = [
        scalar_mul(msk.omega * inv % r, g1),
        scalar_mul(inv, g1),
    ]
    elements.extend(scalar_mul(msk.delta[a] * inv % r, g1) for a in attrs)
    return UserPrivateKey(
        user_id=user.user_id, attributes=attrs, elements=tuple(elements)
    )


def _revocation_coefficients(xs, r):
    """Coefficients (low degree first) of prod (X + x) over the given scalars."""
    coeffs = [1]
    for x in xs:
        coeffs = [
            (coeffs[i - 1] if i else 0) + x * (coeffs[i] if i < len(coeffs) else 0)
            for i in range(len(coeffs) + 1)
        ]
        coeffs = [c % r for c in coeffs]
    return coeffs


def _poly_point(coeffs, y, curve):
    """sum coeffs[i] . y[i] — a polynomial in gamma evaluated in the Y basis."""
    acc = None
    for c, base in zip(coeffs, y):
        term = scalar_mul(c, base)
        acc = term if acc is None else group_add(acc, term)
    return acc


def encapsulate(mpk: MasterPublicKey, policy: AccessPolicy, rng):
    """Fresh session key plus its header under the given policy."""
    required = sorted(policy.required_attributes)
    if not required:
        raise UnknownAttribute("policy requires at least one attribute")
    unknown = set(required) - set(mpk.universe)
    if unknown:
        raise UnknownAttribute(f"policy attributes {sorted(unknown)} unknown")
    revoked = sorted(policy.revoked_users)
    missing = set(revoked) - set(mpk.user_ids)
    if missing:
        raise UnknownRevokedUser(f"revoked ids {sorted(missing)} not registered")

    curve = mpk.curve
    r = int(curve.r)
    s = random_scalar(curve, rng)
    xs = {j: user_scalar(curve, j) for j in revoked}

    c0 = scalar_mul(s, mpk.y[0])
    c1 = scalar_mul(s, mpk.y[1])
    full = _revocation_coefficients([xs[j] for j in revoked], r)
    c_rev = scalar_mul(s, _poly_point(full, mpk.y, curve))
    ds = []
    for j in revoked:
        coeffs = _revocation_coefficients(
            [xs[i] for i in revoked if i != j], r
        )
        ds.append(scalar_mul(s, _poly_point(coeffs, mpk.y, curve)))

    blind = mpk.omega
    for a in required:
        blind = group_add(blind, mpk.attr_omega[a])
    session_point = scalar_mul(s, blind)

    header = AbbeHeader(
        policy=AccessPolicy(frozenset(required), frozenset(revoked)),
        elements=(c0, c1, c_rev, *ds),
    )
    return _kdf(session_point), header


def _kdf(session_point: GTElement) -> bytes:
    return hashlib.sha256(KDF_TAG + session_point.encoding).digest()


def decapsulate(mpk: MasterPublicKey, key: UserPrivateKey, header: AbbeHeader) -> bytes:
    """Recover the session key, or refuse.

    Raises NotAuthorized before any pairing work when the key does not
    satisfy the (public) header policy; successful runs cost exactly three
    pairings. Raises InvalidHeader when the revocation elements are
    mutually inconsistent, MismatchedCurve when key material and header
    belong to different curves.
    """
    curve = mpk.curve
    for el in key.elements:
        if el.curve != curve:
            raise MismatchedCurve("user key was issued on a different curve")
    for el in header.elements:
        if el.curve != curve:
            raise MismatchedCurve("header belongs to a different curve")
    if len(header.elements) != len(header.policy.revoked_users) + 3:
        raise InvalidHeader("header element count does not match its policy")

    holder = UserRecord(key.user_id, key.attributes)
    if not policy_satisfies(header.policy, holder):
        raise NotAuthorized(key.user_id)

    c0, c1, c_rev = header.elements[:3]
    x_u = user_scalar(curve, key.user_id)
    combined = key.elements[0]
    by_attr = dict(zip(key.attributes, key.elements[2:]))
    for a in sorted(header.policy.required_attributes):
        combined = group_add(combined, by_attr[a])

    session_point = pair(combined, group_add(c1, scalar_mul(x_u, c0)))

    revoked = header.revoked_order
    check_lhs = pair(g1_generator(curve), c_rev)
    if revoked:
        j = revoked[0]
        w_j = mpk.w.get(j)
        if w_j is None:
            raise InvalidHeader(f"revoked id {j!r} is not in this registry")
        check_rhs = pair(w_j, header.elements[3])
    else:
        check_rhs = pair(g1_generator(curve), c0)
    if check_lhs != check_rhs:
        raise InvalidHeader("revocation elements are inconsistent")

    return _kdf(session_point)
