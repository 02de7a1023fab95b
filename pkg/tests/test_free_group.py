import random

import pytest

from app.core.errors import InputError
from app.services.free_group import (
    Basis, Word, cyclic_reduce, invert_isomorphism, is_cyclically_reduced, is_pi1_isomorphism, reduce, substitute,
)

AB = Basis(("a", "b"))


def w(text: str) -> Word:
    return Word.parse(text)


def test_reduce_cancels_adjacent_inverses():
    assert reduce("a b b^-1 a^-1", AB).is_identity()
    assert reduce("a a^-1 b", AB) == w("b")
    assert reduce([("a", 1), ("b", 1), ("b", -1)], AB) == w("a")


def test_reduce_rejects_unknown_symbol():
    with pytest.raises(InputError):
        reduce("a c", AB)


def test_parse_accepts_superscript_inverse():
    assert w("a⁻¹ b") == w("a^-1 b")
    assert str(w("a b^-1")) == "a b^-1"


def test_word_arithmetic():
    ab = w("a b")
    assert ab * ab.inverse() == Word()
    assert ab ** 2 == w("a b a b")
    assert ab ** -1 == w("b^-1 a^-1")
    assert Word() < ab


def test_cyclic_reduce_returns_conjugator():
    u, c = cyclic_reduce(w("a b a^-1"))
    assert u == w("a") and c == w("b")
    assert u * c * u.inverse() == w("a b a^-1")
    assert is_cyclically_reduced(c)
    assert not is_cyclically_reduced(w("a b a^-1"))


def test_substitute_applies_homomorphism():
    images = {"a": w("a b"), "b": w("b")}
    assert substitute(w("a b^-1"), images) == w("a")


def test_isomorphism_examples():
    assert is_pi1_isomorphism({"a": w("a b"), "b": w("b")}, AB)
    assert is_pi1_isomorphism({"a": w("b"), "b": w("a")}, AB)
    assert not is_pi1_isomorphism({"a": w("a"), "b": w("a")}, AB)
    assert not is_pi1_isomorphism({"a": w("a a"), "b": w("b")}, AB)


def test_isomorphism_requires_every_generator():
    with pytest.raises(InputError):
        is_pi1_isomorphism({"a": w("a")}, AB)


def test_invert_isomorphism():
    inverse = invert_isomorphism({"a": w("a b"), "b": w("b")}, AB, ("a", "b"))
    assert inverse == {"a": w("a b^-1"), "b": w("b")}
    with pytest.raises(InputError):
        invert_isomorphism({"a": w("a"), "b": w("a")}, AB, ("a", "b"))


def test_basis_validation():
    with pytest.raises(InputError):
        Basis(("a",))
    with pytest.raises(InputError):
        Basis(("a", "a"))


def random_word(rng, length: int) -> Word:
    return Word((rng.choice("abc"), rng.choice((1, -1))) for _ in range(length))


def random_automorphism(rng, basis: Basis, moves: int) -> dict:
    images = {s: Word.letter(s) for s in basis.symbols}
    for _ in range(moves):
        x, y = rng.sample(basis.symbols, 2)
        factor = images[y] if rng.random() < 0.5 else images[y].inverse()
        images[x] = images[x] * factor if rng.random() < 0.5 else factor * images[x]
    return images


def test_reduce_properties_on_random_words():
    rng = random.Random(20)
    for _ in range(200):
        word = random_word(rng, rng.randint(0, 12))
        assert Word(word.letters) == word
        assert (word * word.inverse()).is_identity()
        assert len(word) <= 12


def test_random_automorphisms_are_recognized_and_inverted():
    rng = random.Random(7)
    abc = Basis(("a", "b", "c"))
    for _ in range(40):
        images = random_automorphism(rng, abc, rng.randint(1, 6))
        assert is_pi1_isomorphism(images, abc)
        inverse = invert_isomorphism(images, abc, abc.symbols)
        for symbol in abc.symbols:
            assert substitute(images[symbol], inverse) == Word.letter(symbol)


def test_isomorphism_ignores_basis_permutation():
    rng = random.Random(3)
    abc = Basis(("a", "b", "c"))
    rename = {"a": "b", "b": "c", "c": "a"}
    for _ in range(20):
        images = random_automorphism(rng, abc, 4)
        images[rng.choice(abc.symbols)] = random_word(rng, 3)
        permuted = {s: Word((rename[x], e) for x, e in word) for s, word in images.items()}
        assert is_pi1_isomorphism(images, abc) == is_pi1_isomorphism(permuted, abc)
