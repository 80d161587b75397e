import simplejson as json

from killingfoliator.kf_core import FoliationError, ScenarioFileError
from killingfoliator.kf_expr import parse_expr
from killingfoliator.kf_fields import make_affine, make_expr_field
from killingfoliator.kf_lie import FieldFamily

"""
JSON scenario files. A scenario file declares a family of vector fields on R^n and optionally named points and
invariant expressions:

    {
      "dim": 4,
      "fields": [
        {"name": "X", "matrix": [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], "offset": [0, 0, 0, 0]},
        {"name": "Y", "components": ["z", "w", "-x", "-y"]}
      ],
      "points": {"start": [0.6, 0, 0.8, 0]},
      "invariants": ["x^2 + y^2 + z^2 + w^2", "y*z - x*w"]
    }

"name" is optional and defaults to X1, X2, ...
"""

__license__ = 'MIT'


def _read_points(points):
    if points is None:
        return None
    if not isinstance(points, dict):
        raise ScenarioFileError('"points" maps names to coordinate lists, got {}'.format(type(points).__name__))
    for name, p in points.items():
        if not isinstance(p, list) or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p):
            raise ScenarioFileError('Point {} is not a list of numbers: {!r}'.format(name, p))
    return points


def _read_invariants(invariants, dim):
    if invariants is None:
        return None
    if not isinstance(invariants, list) or not all(isinstance(text, str) for text in invariants):
        raise ScenarioFileError('"invariants" is a list of expression strings, got {!r}'.format(invariants))
    for text in invariants:
        try:
            parse_expr(text, dim)
        except (FoliationError, ValueError) as e:
            raise ScenarioFileError('Invariant {!r}: {}'.format(text, e))
    return invariants


class ScenarioFile(object):
    def __init__(self, dim, fields, names=None, points=None, invariants=None):
        """
        :param dim: ambient dimension
        :param fields: AffineField or ExprField instances
        :param names: display names, default X1, X2, ...
        :param points: dict of named points
        :param invariants: expression texts
        """
        self.dim = dim
        self.fields = list(fields)
        self.names = ['X{}'.format(k + 1) for k in range(len(self.fields))] if names is None else list(names)
        self.points = {k: [float(c) for c in v] for k, v in (points or {}).items()}
        self.invariants = list(invariants or [])
        if not self.fields:
            raise ScenarioFileError('A scenario file needs at least one field')
        if len(self.names) != len(self.fields):
            raise ScenarioFileError('{} names for {} fields'.format(len(self.names), len(self.fields)))
        for name, f in zip(self.names, self.fields):
            if f.dim != dim:
                raise ScenarioFileError('Field {} lives on R^{}, the file declares dim {}'.format(name, f.dim, dim))
        for name, p in self.points.items():
            if len(p) != dim:
                raise ScenarioFileError('Point {} has {} coordinates, the file declares dim {}'.format(
                    name, len(p), dim))

    def family(self):
        """
        :return: kf_lie.FieldFamily of the declared fields
        """
        return FieldFamily(self.fields, self.names)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ScenarioFileError('A scenario file holds a JSON object, got {}'.format(type(d).__name__))
        unknown = set(d) - {'dim', 'fields', 'points', 'invariants'}
        if unknown:
            raise ScenarioFileError('Unknown scenario file keys {}'.format(sorted(unknown)))
        try:
            dim = int(d['dim'])
            specs = list(d['fields'])
        except (KeyError, TypeError, ValueError) as e:
            raise ScenarioFileError('Scenario file needs "dim" and a "fields" list: {}'.format(e))
        fields, names = [], []
        for k, spec in enumerate(specs):
            if not isinstance(spec, dict):
                raise ScenarioFileError('Field spec {} is not a JSON object'.format(k + 1))
            names.append(spec.get('name', 'X{}'.format(k + 1)))
            try:
                if 'matrix' in spec:
                    fields.append(make_affine(spec['matrix'], spec.get('offset', [0.0] * dim)))
                elif 'components' in spec:
                    fields.append(make_expr_field(spec['components'], dim))
                else:
                    raise ScenarioFileError('Field {} needs "matrix"/"offset" or "components"'.format(names[-1]))
            except (FoliationError, ValueError, TypeError) as e:
                if isinstance(e, ScenarioFileError):
                    raise
                raise ScenarioFileError('Field {}: {}'.format(names[-1], e))
        return cls(dim, fields, names, _read_points(d.get('points')), _read_invariants(d.get('invariants'), dim))

    def to_dict(self):
        fields = []
        for name, f in zip(self.names, self.fields):
            spec = {'name': name}
            spec.update(f.to_spec())
            fields.append(spec)
        d = {'dim': self.dim, 'fields': fields}
        if self.points:
            d['points'] = self.points
        if self.invariants:
            d['invariants'] = self.invariants
        return d

    @classmethod
    def loads(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioFileError('Invalid JSON: {}'.format(e))
        return cls.from_dict(d)

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.loads(f.read())

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2)

    def dump(self, path):
        with open(path, 'w') as f:
            f.write(self.dumps() + '\n')

    @classmethod
    def from_family(cls, D, points=None, invariants=None):
        return cls(D.dim, D.members, D.names, points, invariants)

    def __eq__(self, other):
        if not isinstance(other, ScenarioFile):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return '<ScenarioFile dim={} {}>'.format(self.dim, self.names)
