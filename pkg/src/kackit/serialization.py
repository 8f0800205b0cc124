"""
JSON codecs for kackit objects.

Complex numbers are written as [re, im]; plain numbers are accepted on input.
Matrices are row-major nested lists, structure tensors flattened row-major.
Every object carries a "type" field. Wherever an object is expected, a
reference {"ref": name} may stand in and is resolved by the caller's resolver.
No file I/O happens here.
"""

import logging
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .bases import BasisSide, PPBasis
from .commsq import CommutingSquareData
from .crossprod import ActionData, CrossedProductData
from .exceptions import InvalidInput, KacKitError
from .fdca import AlgElem, MMAlgebra, TraceState, UnitalEmbedding, standard_embedding
from .presentation import StarAlgebraPresentation
from .wha import Groupoid, WHAStructure

logger = logging.getLogger(__name__)

Resolver = Callable[[str], Any]


def encode_complex(array: Any) -> Any:
    """Nested lists with every entry as [re, im]."""
    values = np.asarray(array, dtype=complex)
    if values.ndim == 0:
        return [float(values.real), float(values.imag)]
    return [encode_complex(v) for v in values]


def decode_complex(data: Any, field_path: str, shape: Sequence[int]) -> np.ndarray:
    """
    Inverse of encode_complex for an array of the given shape.

    Entries may be [re, im] pairs or bare real numbers; which one is meant is
    read off the number of values.
    """
    try:
        values = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise InvalidInput(f"not a numeric array: {e}", field_path, e)
    expected = int(np.prod(shape))
    if values.size == 2 * expected and values.ndim > 0 and values.shape[-1] == 2:
        array = values[..., 0] + 1j * values[..., 1]
    elif values.size == expected:
        array = values.astype(complex)
    else:
        raise InvalidInput(f"expected {expected} entries, got {values.size} numbers", field_path)
    return array.reshape(tuple(shape))


def _flat(array: np.ndarray) -> List[Any]:
    return encode_complex(np.asarray(array).reshape(-1))


def _require(data: Dict[str, Any], key: str, field_path: str) -> Any:
    if not isinstance(data, dict):
        raise InvalidInput("expected a JSON object", field_path)
    if key not in data:
        raise InvalidInput(f"missing field '{key}'", f"{field_path}.{key}" if field_path else key)
    return data[key]


def _path(parent: str, key: str) -> str:
    return f"{parent}.{key}" if parent else key


# Encoding


def to_json(obj: Any) -> Dict[str, Any]:
    """Encode a kackit object as a JSON-ready dict."""
    if isinstance(obj, MMAlgebra):
        result: Dict[str, Any] = {"type": "algebra", "blocks": list(obj.block_dims)}
        if obj.label:
            result["label"] = obj.label
        return result
    if isinstance(obj, AlgElem):
        return {"type": "element", "algebra": to_json(obj.parent), "vector": _flat(obj.vector)}
    if isinstance(obj, TraceState):
        return {"type": "trace", "algebra": to_json(obj.parent), "weights": list(obj.weights)}
    if isinstance(obj, UnitalEmbedding):
        return {
            "type": "embedding",
            "source": to_json(obj.source),
            "target": to_json(obj.target),
            "matrix": encode_complex(obj.matrix),
        }
    if isinstance(obj, PPBasis):
        return {
            "type": "basis",
            "inclusion": to_json(obj.inclusion),
            "trace": to_json(obj.trace),
            "elements": [_flat(x.vector) for x in obj.elements],
            "side": obj.side.value,
            "orthonormal": obj.orthonormal,
            "unitary": obj.unitary,
        }
    if isinstance(obj, CommutingSquareData):
        return {
            "type": "square",
            "n_in_k": to_json(obj.n_in_k),
            "n_in_l": to_json(obj.n_in_l),
            "k_in_m": to_json(obj.k_in_m),
            "l_in_m": to_json(obj.l_in_m),
            "trace": to_json(obj.trace),
        }
    if isinstance(obj, StarAlgebraPresentation):
        result = {
            "type": "presentation",
            "dim": obj.dim,
            "m": _flat(obj.structure),
            "unit": _flat(obj.unit),
            "star": _flat(obj.involution),
        }
        if obj.trace is not None:
            result["trace"] = _flat(obj.trace)
        return result
    if isinstance(obj, WHAStructure):
        return {
            "type": "wha",
            "dim": obj.dim,
            "m": _flat(obj.algebra.structure),
            "unit": _flat(obj.algebra.unit),
            "star": _flat(obj.algebra.involution),
            "Delta": _flat(obj.delta_matrix),
            "eps": _flat(obj.counit),
            "S": _flat(obj.antipode),
            "status": obj.status.value,
            "label": obj.label,
        }
    if isinstance(obj, Groupoid):
        return {
            "type": "groupoid",
            "objects": list(obj.objects),
            "morphisms": [
                {"id": g, "src": obj.objects[s], "tgt": obj.objects[t]}
                for g, s, t in zip(obj.morphisms, obj.sources, obj.targets)
            ],
            "compose": [
                [obj.morphisms[i], obj.morphisms[j], obj.morphisms[k]] for (i, j), k in sorted(obj.table.items())
            ],
            "inverse": [obj.morphisms[h] for h in obj.inverse],
        }
    if isinstance(obj, ActionData):
        return {
            "type": "action",
            "wha": to_json(obj.acting),
            "target": to_json(obj.target),
            "tensor": _flat(obj.tensor),
            "label": obj.label,
        }
    if isinstance(obj, CrossedProductData):
        return {
            "type": "crossed_product",
            "result": to_json(obj.result),
            "quotient_basis": [list(pair) for pair in obj.quotient_basis],
            "embed_M": encode_complex(obj.embed_M),
            "embed_A": encode_complex(obj.embed_A),
            "relation_rank": obj.relation_rank,
            "residual": obj.residual,
        }
    raise InvalidInput(f"cannot encode {type(obj).__name__}", "type")


# Decoding


def from_json(data: Any, resolver: Optional[Resolver] = None, field_path: str = "") -> Any:
    """
    Decode a dict produced by to_json (or written by hand).

    Raises:
        InvalidInput: With the offending field path on malformed input.
    """
    if isinstance(data, dict) and "ref" in data:
        if resolver is None:
            raise InvalidInput(f"unresolved reference {data['ref']!r}", _path(field_path, "ref"))
        return resolver(str(data["ref"]))
    kind = _require(data, "type", field_path)
    decoder = _DECODERS.get(kind)
    if decoder is None:
        raise InvalidInput(f"unknown type {kind!r}", _path(field_path, "type"))
    try:
        return decoder(data, resolver, field_path)
    except KacKitError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise InvalidInput(f"malformed {kind}: {e}", field_path, e)


def _expect(obj: Any, cls: type, field_path: str) -> Any:
    if not isinstance(obj, cls):
        raise InvalidInput(f"expected {cls.__name__}, got {type(obj).__name__}", field_path)
    return obj


def _child(data: Dict[str, Any], key: str, cls: type, resolver: Optional[Resolver], field_path: str) -> Any:
    path = _path(field_path, key)
    return _expect(from_json(_require(data, key, field_path), resolver, path), cls, path)


def _algebra(data: Dict[str, Any], resolver: Optional[Resolver], field_path: str) -> MMAlgebra:
    blocks = _require(data, "blocks", field_path)
    if not isinstance(blocks, list) or not all(isinstance(n, int) for n in blocks):
        raise InvalidInput("blocks must be a list of integers", _path(field_path, "blocks"))
    return MMAlgebra(tuple(blocks), data.get("label", ""))


def _trace(data: Dict[str, Any], resolver: Optional[Resolver], field_path: str) -> TraceState:
    algebra = _child(data, "algebra", MMAlgebra, resolver, field_path)
    weights = [float(w) for w in _require(data, "weights", field_path)]
    return TraceState.from_weights(algebra, weights)


def _embedding(data: Dict[str, Any], resolver: Optional[Resolver], field_path: str) -> UnitalEmbedding:
    source = _child(data, "source", MMAlgebra, resolver, field_path)
    if "inclusion" in data:
        target = _child(data, "target", MMAlgebra, resolver, field_path) if "target" in data else None
        return standard_embedding(source, data["inclusion"], target)
    target = _child(data, "target", MMAlgebra, resolver, field_path)
    matrix = decode_complex(_require(data, "matrix", field_path), _path(field_path, "matrix"), (target.dim, source.dim))
    return UnitalEmbedding(source, target, matrix)


def _basis(data: Dict[str, Any], resolver: Optional[Resolver], field_path: str) -> PPBasis:
    inclusion = _child(data, "inclusion", UnitalEmbedding, resolver, field_path)
    trace = _child(data, "trace", TraceState, resolver, field_path)
    ambient = inclusion.target
    elements = []
    for index, entry in enumerate(_require(data, "elements", field_path)):
        vector = decode_complex(entry, _path(field_path, f"elements[{index}]"), (ambient.dim,))
        elements.append(ambient.from_vector(vector))
    return PPBasis(
        inclusion,
        trace,
        tuple(elements),
        BasisSide(data.get("side", BasisSide.RIGHT.value)),
        bool(data.get("orthonormal", False)),
        bool(data.get("unitary", False)),
    )


def _square(data: Dict[str, Any], resolver: Optional[Resolver], field_path: str) -> CommutingSquareData:
    legs = {
        key: _child(data, key, UnitalEmbedding, resolver, field_path)
        for key in ("n_in_k", "n_in_l", "k_in_m", "l_in_m")
    }
    trace = _child(data, "trace", TraceState, resolver, field_path)
    return CommutingSquareData(trace=trace, **legs)


def _presentation(data: Dict[str, Any], resolver: Optional[Resolver], field_path: str) -> StarAlgebraPresentation:
    d = int(_require(data, "dim", field_path))
    trace = None
    if "trace" in data:
        trace = decode_complex(data["trace"], _path(field_path, "trace"), (d,))
    return StarAlgebraPresentation(
        structure=decode_complex(_require(data, "m", field_path), _path(field_path, "m"), (d, d, d)),
        unit=decode_complex(_require(data, "unit", field_path), _path(field_path, "unit"), (d,)),
        involution=decode_complex(_require(data, "star", field_path), _path(field_path, "star"), (d, d)),
        trace=trace,
        label=data.get("label", ""),
    )


def _wha(data: Dict[str, Any], resolver: Optional[Resolver], field_path: str) -> WHAStructure:
    """A written "status" is ignored; decoded structures start pending until certified."""
    algebra = _presentation(data, resolver, field_path)
    d = algebra.dim
    return WHAStructure(
        algebra=algebra,
        delta=decode_complex(_require(data, "Delta", field_path), _path(field_path, "Delta"), (d, d, d)),
        counit=decode_complex(_require(data, "eps", field_path), _path(field_path, "eps"), (d,)),
        antipode=decode_complex(_require(data, "S", field_path), _path(field_path, "S"), (d, d)),
        label=data.get("label", ""),
    )


def _lookup(names: Dict[str, int], value: Any, what: str, field_path: str) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    if str(value) not in names:
        raise InvalidInput(f"unknown {what} {value!r}", field_path)
    return names[str(value)]


def _groupoid(data: Dict[str, Any], resolver: Optional[Resolver], field_path: str) -> Groupoid:
    objects = [str(x) for x in _require(data, "objects", field_path)]
    object_index = {x: i for i, x in enumerate(objects)}
    morphisms = _require(data, "morphisms", field_path)
    ids, sources, targets = [], [], []
    for index, entry in enumerate(morphisms):
        path = _path(field_path, f"morphisms[{index}]")
        ids.append(str(_require(entry, "id", path)))
        sources.append(_lookup(object_index, _require(entry, "src", path), "object", _path(path, "src")))
        targets.append(_lookup(object_index, _require(entry, "tgt", path), "object", _path(path, "tgt")))
    morphism_index = {g: i for i, g in enumerate(ids)}
    table = {}
    for index, triple in enumerate(_require(data, "compose", field_path)):
        path = _path(field_path, f"compose[{index}]")
        if not isinstance(triple, list) or len(triple) != 3:
            raise InvalidInput("composition entries are [i, j, i o j]", path)
        i, j, k = (_lookup(morphism_index, v, "morphism", path) for v in triple)
        table[(i, j)] = k
    inverse = [
        _lookup(morphism_index, v, "morphism", _path(field_path, f"inverse[{index}]"))
        for index, v in enumerate(_require(data, "inverse", field_path))
    ]
    return Groupoid(tuple(objects), tuple(ids), tuple(sources), tuple(targets), table, tuple(inverse))


def _action(data: Dict[str, Any], resolver: Optional[Resolver], field_path: str) -> ActionData:
    if "wha_ref" in data:
        data = {**data, "wha": {"ref": data["wha_ref"]}}
    if "target_ref" in data:
        data = {**data, "target": {"ref": data["target_ref"]}}
    acting = _child(data, "wha", WHAStructure, resolver, field_path)
    target = from_json(_require(data, "target", field_path), resolver, _path(field_path, "target"))
    if not isinstance(target, (MMAlgebra, StarAlgebraPresentation)):
        raise InvalidInput("action target must be an algebra or a presentation", _path(field_path, "target"))
    tensor = decode_complex(
        _require(data, "tensor", field_path), _path(field_path, "tensor"), (acting.dim, target.dim, target.dim)
    )
    return ActionData(acting, target, tensor, data.get("label", ""))


def _element(data: Dict[str, Any], resolver: Optional[Resolver], field_path: str) -> AlgElem:
    algebra = _child(data, "algebra", MMAlgebra, resolver, field_path)
    vector = decode_complex(_require(data, "vector", field_path), _path(field_path, "vector"), (algebra.dim,))
    return algebra.from_vector(vector)


_DECODERS: Dict[str, Callable[[Dict[str, Any], Optional[Resolver], str], Any]] = {
    "algebra": _algebra,
    "trace": _trace,
    "embedding": _embedding,
    "basis": _basis,
    "square": _square,
    "presentation": _presentation,
    "wha": _wha,
    "groupoid": _groupoid,
    "action": _action,
    "element": _element,
}
