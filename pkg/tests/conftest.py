from fractions import Fraction

import pytest

from dmlab.measure import BinomialWeights, TreeMeasure


@pytest.fixture
def lebesgue() -> TreeMeasure:
    return TreeMeasure(BinomialWeights(Fraction(1, 2)))


@pytest.fixture
def binom13() -> TreeMeasure:
    return TreeMeasure(BinomialWeights(Fraction(1, 3)))
