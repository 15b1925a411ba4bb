"""Walk through the exact falling-factorial calculus.

The quantity ff_half(n) = |(1/2)(1/2-1)...(1/2-n+1)| replaces n! as the
growth yardstick in derivative bounds for squared quantities: unlike the
factorial, its binomial self-convolutions reproduce it up to the fixed
constants 2, 3, 4.  Everything here is exact rational arithmetic.
"""

from gevrey_evp import (
    Multiindex,
    binomial_ff_sum,
    factorial_ratio,
    ff_convolution_bound,
    ff_double_convolution_bound,
    ff_half,
    square_domination_check,
    vandermonde_slice,
)

print("n, ff_half(n), n!/ff_half(n)  (the ratio stays within [1, 2*2^n]):")
for n in range(9):
    print(f"  {n}: {str(ff_half(n)):>8}   ratio {factorial_ratio(n)}")

print("\nbinomial self-convolutions of ff_half (exact, n >= 2):")
for n in (2, 5, 12, 40):
    inner = binomial_ff_sum(n, "inner") / ff_half(n)
    mid = binomial_ff_sum(n, "mid") / ff_half(n)
    full = binomial_ff_sum(n, "full") / ff_half(n)
    print(f"  n={n:2d}: inner/mid/full = {inner}, {mid}, {full}")

print("\nmultiindex versions (dimension-free):")
nu = Multiindex((2, 1, 1))
print(f"  nu = {nu.entries}, |nu| = {nu.order()}")
for r in range(nu.order() + 1):
    print(f"  sum of binomials over |m| = {r}: {vandermonde_slice(nu, r)}")
lhs, rhs, equal = ff_convolution_bound(nu)
print(f"  single convolution: {lhs} vs 3*ff_half = {rhs}, equal = {equal}")
lhs, rhs = ff_double_convolution_bound(nu)
print(f"  double convolution: {lhs} <= 8*ff_half = {rhs}: {lhs <= rhs}")

print("\nwhy ff_half: for f(y) = (1 - sqrt(1-y))/2 the square g = f^2")
print("is dominated derivative-by-derivative by f itself:")
report = square_domination_check(10, [-2.0, -0.5, 0.0, 0.5, 0.9])
print(f"  max |g^(n)|/|f^(n)| over the grid: {report.max_ratio:.15f}")
print(f"  worst equality defect for n >= 2:  {report.max_equality_defect:.2e}")
print(f"  all checks passed: {report.ok}")
