from dataclasses import dataclass


@dataclass(frozen=True)
class EpsilonSchedule:
    rho: float
    epsilon0: float = 1.0
    floor: float = 0.01

    def value(self, t):
        # the action counter starts at 1; the clamp keeps the first steps fully random
        if t <= 0:
            return 1.0
        return min(1.0, self.epsilon0 * t ** -self.rho + self.floor)
