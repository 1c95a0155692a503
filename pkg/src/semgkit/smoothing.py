"""Majority-vote smoothing of a raw prediction stream."""

from collections import Counter, deque
from dataclasses import dataclass

from .core import GestureLabel


@dataclass(frozen=True)
class VoteConfig:
    vote_window: int = 5
    initial: int = GestureLabel.REST

    def __post_init__(self):
        if int(self.vote_window) < 1:
            raise ValueError("vote_window must be >= 1")


class MajorityVoter:
    """Incremental majority vote: push one raw label, get one smoothed label.

    The output is the most frequent label among the last ``vote_window``
    raw labels. When several labels share the top count the previous
    output is kept.
    """

    def __init__(self, cfg: VoteConfig = VoteConfig()):
        self.cfg = cfg
        self._buf = deque(maxlen=cfg.vote_window)
        self._counts = Counter()
        self.current = int(cfg.initial)

    def push(self, label) -> int:
        label = int(label)
        if len(self._buf) == self._buf.maxlen:
            old = self._buf[0]
            self._counts[old] -= 1
            if not self._counts[old]:
                del self._counts[old]
        self._buf.append(label)
        self._counts[label] += 1
        top = max(self._counts.values())
        leaders = [v for v, n in self._counts.items() if n == top]
        if len(leaders) == 1:
            self.current = leaders[0]
        return self.current


def majority_vote(raw, cfg: VoteConfig = VoteConfig()) -> list:
    voter = MajorityVoter(cfg)
    return [voter.push(v) for v in raw]
