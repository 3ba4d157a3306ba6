"""
Generator tables for the pseudo-classical Grassmann sector
Names, kinds and conjugation pairing of the odd generators
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

MAX_GENERATORS = 64

LEVEL_KINDS = ('alpha', 'alpha*', 'beta', 'beta*')
GENERATOR_KINDS = ('xi',) + LEVEL_KINDS + ('momentum',)

# complex conjugation among the level variables; xi^mu is real
_LEVEL_CONJUGATES = {'alpha': 'alpha*', 'alpha*': 'alpha', 'beta': 'beta*', 'beta*': 'beta'}


class TableMismatchError(ValueError):
    """Raised when two Grassmann quantities live over different generator tables"""


@dataclass(frozen=True)
class Generator:
    """One odd generator of the table"""
    name: str
    kind: str
    index: Optional[int] = None  # Lorentz index for xi-vector entries
    target: Optional[str] = None  # conjugate variable for momentum entries

    def to_dict(self):
        return {
            'name': self.name,
            'kind': self.kind,
            'index': self.index,
            'target': self.target
        }


class GeneratorTable:
    """
    Ordered set of Grassmann-odd generators.

    The position of a generator in the table is its bit in the monomial
    bitmask, so the table order is the canonical (ascending) order of every
    stored monomial.
    """

    def __init__(self, entries: List[Generator]):
        if len(entries) > MAX_GENERATORS:
            raise ValueError(f"At most {MAX_GENERATORS} generators are supported, got {len(entries)}")

        names = [entry.name for entry in entries]
        if len(set(names)) != len(names):
            raise ValueError(f"Generator names must be unique: {names}")

        for entry in entries:
            if entry.kind not in GENERATOR_KINDS:
                raise ValueError(f"Unknown generator kind '{entry.kind}' for {entry.name}")
            if entry.kind == 'momentum':
                if entry.target not in names:
                    raise ValueError(f"Momentum {entry.name} references unknown generator {entry.target}")
                if entries[names.index(entry.target)].kind == 'momentum':
                    raise ValueError(f"Momentum {entry.name} must reference a non-momentum generator")

        targets = [entry.target for entry in entries if entry.kind == 'momentum']
        if len(set(targets)) != len(targets):
            raise ValueError("Each generator can have at most one conjugate momentum")

        self.entries: Tuple[Generator, ...] = tuple(entries)
        self._positions: Dict[str, int] = {name: i for i, name in enumerate(names)}
        self._conjugates = self._build_conjugation()

    def _build_conjugation(self) -> Tuple[int, ...]:
        """Position of the complex conjugate of each generator"""
        by_kind = {entry.kind: entry.name for entry in self.entries if entry.kind in LEVEL_KINDS}
        conjugates = []
        for i, entry in enumerate(self.entries):
            if entry.kind == 'xi':
                conjugates.append(i)
            elif entry.kind in LEVEL_KINDS:
                partner = by_kind.get(_LEVEL_CONJUGATES[entry.kind])
                if partner is None:
                    raise ValueError(f"Level generator {entry.name} has no conjugate partner in the table")
                conjugates.append(self._positions[partner])
            else:
                conjugates.append(-1)

        # momenta conjugate along with the variable they belong to
        momentum_of = {entry.target: i for i, entry in enumerate(self.entries) if entry.kind == 'momentum'}
        for i, entry in enumerate(self.entries):
            if entry.kind == 'momentum':
                partner_var = self.entries[conjugates[self._positions[entry.target]]].name
                if partner_var not in momentum_of:
                    raise ValueError(f"Momentum {entry.name} has no conjugate partner in the table")
                conjugates[i] = momentum_of[partner_var]
        return tuple(conjugates)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, GeneratorTable) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def position(self, name: str) -> int:
        """Bit position of a generator"""
        try:
            return self._positions[name]
        except KeyError:
            raise KeyError(f"Unknown generator '{name}'")

    def name(self, position: int) -> str:
        return self.entries[position].name

    def conjugate_position(self, position: int) -> int:
        return self._conjugates[position]

    def momentum_of(self, name: str) -> Optional[str]:
        """Name of the momentum conjugate to a generator, if the table has one"""
        for entry in self.entries:
            if entry.kind == 'momentum' and entry.target == name:
                return entry.name
        return None

    def xi_names(self) -> List[str]:
        """xi^mu generator names ordered by Lorentz index"""
        xis = sorted((e for e in self.entries if e.kind == 'xi'), key=lambda e: e.index)
        return [e.name for e in xis]

    def to_dict(self):
        return {'generators': [entry.to_dict() for entry in self.entries]}


def two_level_atom_table() -> GeneratorTable:
    """
    Standard table of the two-level atom: the real dipole 4-vector xi^mu,
    the level variables alpha, alpha*, beta, beta* and all their momenta.
    """
    entries = [Generator(f'xi{mu}', 'xi', index=mu) for mu in range(4)]
    entries += [Generator(kind, kind) for kind in LEVEL_KINDS]
    entries += [Generator(f'pi_xi{mu}', 'momentum', target=f'xi{mu}') for mu in range(4)]
    entries += [Generator(f'pi_{kind}', 'momentum', target=kind) for kind in LEVEL_KINDS]
    return GeneratorTable(entries)


def dipole_table() -> GeneratorTable:
    """Smaller table with only xi^mu and its momenta"""
    entries = [Generator(f'xi{mu}', 'xi', index=mu) for mu in range(4)]
    entries += [Generator(f'pi_xi{mu}', 'momentum', target=f'xi{mu}') for mu in range(4)]
    return GeneratorTable(entries)
