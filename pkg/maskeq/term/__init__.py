# pylint: disable=unused-import
from maskeq.term.core import (ADD, APP, CONST, MUL, VAR, MissingBinding,
                              TermId, TermStore, UnknownSymbol)
from maskeq.term.poly import (Factor, Monomial, Polynomial, check_shape,
                              cmp_factor, cmp_monomial)
