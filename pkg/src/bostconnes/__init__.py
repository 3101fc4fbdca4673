"""Bost-Connes systems built from abstract data: groups, operators, states, categories."""
from . import bcdata, exactalg, qsmrep, tannaka, thermo
from .bcdata import Datum, Embedding, GaloisElem
from .errors import (BCError, ConfigError, DivergentParameter, KindMismatch, LatticeMismatch,
                     LevelTooSmall, NotAdmissible, NotDiagonalizable, NotInImage)
from .ghom import GHom

__all__ = ["bcdata", "exactalg", "qsmrep", "tannaka", "thermo", "Datum", "Embedding", "GaloisElem",
           "GHom", "BCError", "ConfigError", "DivergentParameter", "KindMismatch", "LatticeMismatch",
           "LevelTooSmall", "NotAdmissible", "NotDiagonalizable", "NotInImage"]
