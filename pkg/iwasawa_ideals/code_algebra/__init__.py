"""This folder contains the algebra used by the commands.

* gf.py: residue fields F_q = F_p[t]/(phi) and their regular representation
* padic.py: the rings O_F / p^M, Teichmueller lifts and digits in the basis varpi^i [lambda^k]
* series.py: the truncated power-series ring A_N, dense coefficient vectors over graded-lex monomials
* ideals.py: ideals of A_N, the filtration value nu, graded membership and the delta estimates
* moore.py: exact polynomials over F_p, Moore determinants, comatrices and the U_f certificates
* dynamics.py: the embedding of U into A_N, the rho- and Gamma-actions, Taylor checks and Gamma-closure

"""
