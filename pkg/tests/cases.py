"""The solved generator/law pairs shared by the duality and law tests.

Each entry ties together: a monotone-derivative description (F, domain,
anchor), the closed-form generator, and the closed-form weight law whose
cumulant function is the generator's conjugate.
"""

import math
from dataclasses import dataclass

from baresim import laws as lw
from baresim.divergence import (
    AnchoredKL,
    BlendedWeightChiSq,
    GenAsymLaplace,
    GeneralizedKL,
    PowerGamma,
    TwoPoint,
)
from baresim.legendre import GeneratorSpec

INF = math.inf


@dataclass(frozen=True)
class SolvedCase:
    name: str
    gen: object
    law: object
    a_F: float
    b_F: float
    anchor: float = 0.0

    def spec(self) -> GeneratorSpec:
        gen = self.gen
        if isinstance(gen, AnchoredKL):
            # anchored construction: F = log, anchor c
            return GeneratorSpec(
                F=lambda t: math.log(t) if t > 0 else -INF,
                a_F=0.0, b_F=INF, c=self.anchor,
            )

        def F(t: float) -> float:
            val = gen.phi_prime(t)
            v = float(val)
            return v if math.isfinite(v) else -INF

        return GeneratorSpec(F=F, a_F=self.a_F, b_F=self.b_F, c=0.0)


SOLVED_CASES = [
    SolvedCase("power gamma=-1", PowerGamma(-1.0, 1.0), lw.TiltedStable(-1.0, 1.0), 0.0, INF),
    SolvedCase("power gamma=0.5", PowerGamma(0.5, 1.0), lw.CompoundPoissonGamma(0.5, 1.0), 0.0, INF),
    SolvedCase("power gamma=3", PowerGamma(3.0, 1.0), lw.DistortedStable(3.0, 1.0), 0.0, INF),
    SolvedCase("power gamma=2", PowerGamma(2.0, 1.0), lw.Gaussian(1.0), -INF, INF),
    SolvedCase("power gamma=0", PowerGamma(0.0, 1.0), lw.GammaLaw(1.0), 0.0, INF),
    SolvedCase("power gamma=1", PowerGamma(1.0, 1.0), lw.ScaledPoisson(1.0), 0.0, INF),
    SolvedCase("anchored kl", AnchoredKL(1.0), lw.ShiftedPoisson(1.0), 0.0, INF, anchor=1.0),
    SolvedCase("generalized kl", GeneralizedKL(1.0, 1.0), lw.ScaledNegBinomial(1.0, 1.0), 0.0, INF),
    SolvedCase("generalized kl neg", GeneralizedKL(-1.0 / 3.0, 1.0), lw.ScaledBinomial(3, 1.0), 0.0, 3.0),
    SolvedCase("blended chi-square", BlendedWeightChiSq(0.5, 1.0), lw.ModTiltedStable(0.5, 1.0), -1.0, INF),
    SolvedCase("two point", TwoPoint(0.0, 2.0), lw.TwoPointLaw(0.0, 2.0), 0.0, 2.0),
    SolvedCase("asym laplace", GenAsymLaplace(1.0, 2.0, 1.5, 1.0), lw.GenAsymLaplaceLaw(1.0, 2.0, 1.5, 1.0), -INF, INF),
]
