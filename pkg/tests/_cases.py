"""Sample argument sets for the bundled calculation ops."""
from threadloop.literal import parse_array_literal as lit

CALC_CASES = {
    "linscale": lambda: {"a": lit("double[3,2]{1 2 3 4 5 6}"), "b": lit("double[]{2}"),
                         "c": lit("double[3]{4 5 6}")},
    "pp_mandel": lambda: ({"c": lit("double[2,3]{0 0 2 2 -0.5 0.5}")}, {"max_it": 50}),
    "cartND": lambda: {"vec": lit("double[2,3]{3 4 1 0 6 8}")},
    "multisum": lambda: {"im": lit("double[2,2,3]{1 2 3 4 5 6 7 8 9 10 11 12}")},
    "solve_quad": lambda: {"coeffs": lit("double[3,3]{2 -3 1 1 0 -1 5 1 1}")},
    "countbad": lambda: {"in": lit("short[4,2]{1 BAD 3 BAD 5 6 7 BAD}")},
    "recip": lambda: {"in": lit("double[5]{2 0 BAD 4 -8}")},
    "increments": lambda: {"in": lit("double[4,3]{1 2 4 8 0 1 BAD 3 5 5 5 5}")},
    "index": lambda: {"src": lit("double[3,2]{1 2 3 4 5 6}"), "dex": lit("indx[2]{2 0}")},
    "index1d": lambda: {"src": lit("double[3,2]{1 2 3 4 5 6}"), "dex": lit("indx[2]{2 0}")},
    "add": lambda: {"a": lit("int[3,2]{1 2 3 4 5 6}"), "b": lit("int[1,2]{10 20}")},
    "scale": lambda: ({"a": lit("double[4]{1 2 3 4}")}, {"f": 2.5}),
    "tlscale": lambda: ({"a": lit("double[2,3]{1 2 3 4 5 6}")}, {"f": -1.0}),
}


def case(name):
    c = CALC_CASES[name]()
    return c if isinstance(c, tuple) else (c, None)
