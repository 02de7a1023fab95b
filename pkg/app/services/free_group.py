"""Приведённые слова в свободной группе и свёртки Столлингса.

Слово хранится как кортеж букв ``(символ, ±1)`` и всегда приведено.
Тот же тип используется для путей по рёбрам графа: символ буквы
это идентификатор ребра, знак задаёт направление обхода.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from app.core.errors import InputError

logger = logging.getLogger(__name__)

Letter = Tuple[str, int]


def free_reduce(letters: Iterable[Letter]) -> Tuple[Letter, ...]:
    """Свободное сокращение последовательности букв"""
    stack: List[Letter] = []
    for symbol, sign in letters:
        if stack and stack[-1][0] == symbol and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((symbol, sign))
    return tuple(stack)


def _parse_token(token: str) -> Letter:
    for suffix in ("^-1", "⁻¹"):
        if token.endswith(suffix):
            symbol = token[: -len(suffix)]
            sign = -1
            break
    else:
        symbol = token[:-2] if token.endswith("^1") else token
        sign = 1
    if not symbol or "^" in symbol:
        raise InputError(f"Malformed letter: {token!r}", {"token": token})
    return symbol, sign


class Word:
    """Приведённое слово (неизменяемое)"""

    __slots__ = ("letters", "_hash")

    def __init__(self, letters: Iterable[Letter] = ()):
        self.letters: Tuple[Letter, ...] = free_reduce((str(s), int(e)) for s, e in letters)
        self._hash = hash(self.letters)

    @classmethod
    def parse(cls, text: Union[str, Sequence[str]], alphabet: Optional[Iterable[str]] = None) -> "Word":
        """Разбирает запись вида "a b^-1" (или список токенов)"""
        tokens = text.split() if isinstance(text, str) else list(text)
        letters = [_parse_token(token) for token in tokens]
        if alphabet is not None:
            _check_alphabet(letters, set(alphabet))
        return cls(letters)

    @classmethod
    def letter(cls, symbol: str, sign: int = 1) -> "Word":
        return cls([(symbol, sign)])

    def inverse(self) -> "Word":
        return Word((s, -e) for s, e in reversed(self.letters))

    def is_identity(self) -> bool:
        return not self.letters

    def symbols(self) -> set:
        return {s for s, _ in self.letters}

    def first(self) -> Optional[Letter]:
        return self.letters[0] if self.letters else None

    def last(self) -> Optional[Letter]:
        return self.letters[-1] if self.letters else None

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __pow__(self, exponent: int) -> "Word":
        base = self if exponent >= 0 else self.inverse()
        return Word(base.letters * abs(exponent))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.letters == other.letters

    def __lt__(self, other: "Word") -> bool:
        return (len(self), self.letters) < (len(other), other.letters)

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return render_letters(self.letters)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


def render_letters(letters: Iterable[Letter]) -> str:
    return " ".join(s if e > 0 else f"{s}^-1" for s, e in letters)


def inverse_letter(letter: Letter) -> Letter:
    return letter[0], -letter[1]


def _check_alphabet(letters: Iterable[Letter], alphabet: set) -> None:
    for symbol, _ in letters:
        if symbol not in alphabet:
            raise InputError(f"Unknown symbol: {symbol}", {"symbol": symbol})


@dataclass(frozen=True)
class Basis:
    symbols: Tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) < 2:
            raise InputError("Basis rank must be at least 2", {"rank": len(self.symbols)})
        if len(set(self.symbols)) != len(self.symbols):
            raise InputError("Basis symbols must be unique", {"symbols": list(self.symbols)})

    @property
    def rank(self) -> int:
        return len(self.symbols)

    def generator(self, symbol: str) -> Word:
        if symbol not in self.symbols:
            raise InputError(f"Unknown symbol: {symbol}", {"symbol": symbol})
        return Word.letter(symbol)


def reduce(letters: Union[str, Iterable[Letter]], basis: Optional[Basis] = None) -> Word:
    """Свободная редукция с проверкой алфавита"""
    if isinstance(letters, str):
        return Word.parse(letters, basis.symbols if basis else None)
    letters = list(letters)
    if basis is not None:
        _check_alphabet(letters, set(basis.symbols))
    return Word(letters)


def cyclic_reduce(word: Word) -> Tuple[Word, Word]:
    """Возвращает (u, c) с word = u·c·u⁻¹ и циклически приведённым c"""
    letters = word.letters
    start, end = 0, len(letters)
    while end - start >= 2 and letters[start][0] == letters[end - 1][0] and letters[start][1] == -letters[end - 1][1]:
        start += 1
        end -= 1
    return Word(letters[:start]), Word(letters[start:end])


def is_cyclically_reduced(word: Word) -> bool:
    return len(word) < 2 or word.letters[0] != inverse_letter(word.letters[-1])


def substitute(word: Word, images: Mapping[str, Word]) -> Word:
    """Образ слова при гомоморфизме, заданном на образующих"""
    result: List[Letter] = []
    for symbol, sign in word:
        image = images[symbol]
        result.extend(image.letters if sign > 0 else image.inverse().letters)
    return Word(result)


class _FoldGraph:
    """Граф для свёрток Столлингса; у рёбер может быть вес в исходной группе"""

    ORIGIN = 0

    def __init__(self):
        # id -> [tail, head, symbol, weight]
        self.edges: Dict[int, list] = {}
        self._next_edge = 0
        self._next_vertex = 1

    def new_vertex(self) -> int:
        self._next_vertex += 1
        return self._next_vertex - 1

    def add_edge(self, tail: int, head: int, symbol: str, weight: Word) -> None:
        self.edges[self._next_edge] = [tail, head, symbol, weight]
        self._next_edge += 1

    def vertices(self) -> set:
        found = {self.ORIGIN}
        for tail, head, _, _ in self.edges.values():
            found.update((tail, head))
        return found

    def half_edges(self, vertex: int) -> Iterator[Tuple[Letter, int, int, Word]]:
        for eid, (tail, head, symbol, weight) in self.edges.items():
            if tail == vertex:
                yield (symbol, 1), eid, head, weight
            if head == vertex:
                yield (symbol, -1), eid, tail, weight.inverse()

    def find_fold(self):
        for vertex in sorted(self.vertices()):
            seen: Dict[Letter, Tuple[int, int, Word]] = {}
            for label, eid, other, weight in self.half_edges(vertex):
                if label in seen:
                    return vertex, seen[label], (eid, other, weight)
                seen[label] = (eid, other, weight)
        return None

    def gauge(self, vertex: int, c: Word) -> None:
        for edge in self.edges.values():
            tail, head, _, weight = edge
            if tail == vertex and head == vertex:
                edge[3] = c.inverse() * weight * c
            elif tail == vertex:
                edge[3] = c.inverse() * weight
            elif head == vertex:
                edge[3] = weight * c

    def merge(self, keep_edge: int, drop_edge: int, a: int, b: int) -> None:
        del self.edges[drop_edge]
        if a == b:
            return
        # Начало букета никогда не исчезает
        keep, drop = (b, a) if b == self.ORIGIN else (a, b)
        for edge in self.edges.values():
            if edge[0] == drop:
                edge[0] = keep
            if edge[1] == drop:
                edge[1] = keep

    def trim(self) -> None:
        """Удаляет висячие вершины (кроме начала)"""
        changed = True
        while changed:
            changed = False
            for vertex in sorted(self.vertices() - {self.ORIGIN}):
                incident = [eid for _, eid, _, _ in self.half_edges(vertex)]
                if len(incident) == 1:
                    del self.edges[incident[0]]
                    changed = True


def _wedge(images: Mapping[str, Word]) -> Tuple[_FoldGraph, bool]:
    graph = _FoldGraph()
    degenerate = False
    for generator, word in images.items():
        if word.is_identity():
            degenerate = True
            continue
        current = graph.ORIGIN
        letters = word.letters
        for index, (symbol, sign) in enumerate(letters):
            nxt = graph.ORIGIN if index == len(letters) - 1 else graph.new_vertex()
            weight = Word.letter(generator) if index == 0 else Word()
            if sign > 0:
                graph.add_edge(current, nxt, symbol, weight)
            else:
                graph.add_edge(nxt, current, symbol, weight.inverse())
            current = nxt
    return graph, degenerate


def _fold(graph: _FoldGraph) -> None:
    origin = graph.ORIGIN
    while True:
        found = graph.find_fold()
        if found is None:
            return
        v, (eid1, a, w1), (eid2, b, w2) = found
        if a != b:
            # Выравниваем веса калибровкой в вершине, отличной от начала
            if b != origin and b != v:
                graph.gauge(b, w2.inverse() * w1)
            elif a != origin and a != v:
                graph.gauge(a, w1.inverse() * w2)
            elif b == origin:
                graph.gauge(v, w1.inverse() * w2)
            else:
                graph.gauge(v, w2.inverse() * w1)
        graph.merge(eid1, eid2, a, b)


def _folded_rose(images: Mapping[str, Word], target: Sequence[str]) -> Optional[Dict[str, Word]]:
    """Сворачивает букет образов; возвращает веса петель, если получилась роза"""
    alphabet = set(target)
    for word in images.values():
        _check_alphabet(word.letters, alphabet)
    if len(images) != len(alphabet):
        return None
    graph, degenerate = _wedge(images)
    if degenerate:
        return None
    _fold(graph)
    graph.trim()
    if graph.vertices() != {graph.ORIGIN}:
        return None
    loops: Dict[str, Word] = {}
    for tail, head, symbol, weight in graph.edges.values():
        if symbol in loops:
            return None
        loops[symbol] = weight
    if set(loops) != alphabet:
        return None
    return loops


def is_pi1_isomorphism(h: Mapping[str, Word], basis: Basis, target: Optional[Sequence[str]] = None) -> bool:
    """Является ли гомоморфизм, заданный образами образующих, изоморфизмом"""
    target = tuple(target) if target is not None else basis.symbols
    if set(h) != set(basis.symbols):
        raise InputError("Homomorphism must assign every generator", {"missing": sorted(set(basis.symbols) - set(h))})
    return _folded_rose(h, target) is not None


def invert_isomorphism(h: Mapping[str, Word], basis: Basis, target: Sequence[str]) -> Dict[str, Word]:
    """Обратный изоморфизм: каждому символу target сопоставляет слово над basis"""
    loops = _folded_rose(h, tuple(target))
    if loops is None:
        raise InputError("Map is not an isomorphism of free groups", {"images": {k: str(v) for k, v in h.items()}})
    logger.debug("Inverted isomorphism on %d generators", len(loops))
    return loops
