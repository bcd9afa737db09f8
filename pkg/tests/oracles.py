"""Reference values computed independently (mpmath quadrature at 30 digits,
hand enumeration or closed forms) and frozen here."""
import numpy as np

E_G2 = 0.140087910869031418  # E[g(U)^2], g(u) = 2u ln u + 2(1-u) ln(1-u) + 1
QUICKSORT_VAR = 0.420263732607094254  # 3 E[g^2] = 7 - 2 pi^2 / 3
E_H2 = 0.118355311050591188  # E[h(U)^2], h(u) = u + u ln u + (1-u) ln(1-u)
RRT_VAR = 0.355065933151773564  # 3 E[h^2] = 2 - pi^2 / 6
SPLIT_MU_BST = 0.5  # -E[U ln U + (1-U) ln(1-U)]
C4_QUICKSORT_HALF = 2.82842712474619008  # E[min(U, 1-U)^(-1/2)]
SPLIT2D_MIN_GAIN_HALF = 0.218508012224410535
SPLIT2D_OP_NORM_HALF = 0.572061402817684298
G2_HALF = (-1.77258872223978124, -0.212098120373296873)
SLICED_SHIFT_FACTOR = 2.0 / np.pi  # E|<u, e>| for u uniform on the circle
GAUSS_PEAK = 0.398942280401432678  # 1 / sqrt(2 pi)
CHI_TRACE = (0.5, 0.75, 1.125, 1.625, 2.125, 2.625, 3.125)


def quicksort_mean(n):
    """2(n+1) H_n - 4n via the exact recurrence E[C_n] = n - 1 + (2/n) sum_k E[C_k]."""
    c = [0.0]
    for m in range(1, n + 1):
        c.append(m - 1 + 2.0 / m * sum(c[:m]))
    return c[n]
