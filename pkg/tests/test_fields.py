from legendre_betti.algebra import LAM, RatFunc
from legendre_betti.fields import Place, QuadField, height, ord_at, product_formula_sum


def test_place_degree_counts_complex_points():
    assert Place.at(LAM ** 2 + 1).degree == 2
    assert Place.infinity().degree == 1


def test_height_of_lambda_and_product_formula():
    K = QuadField(None)
    x = K(RatFunc(LAM ** 2 + 1, LAM - 3))
    assert height(x) == 2
    assert product_formula_sum(x) == 0


def test_ramified_valuation_of_mu():
    K = QuadField(4 - 2 * LAM)
    mu = K(0, RatFunc(1))
    assert K.ramification(Place.at(2)) == 2
    assert ord_at(mu, Place.at(2)) == 1
    assert ord_at(K.lam() - 2, Place.at(2)) == 2
    assert product_formula_sum(mu) == 0
