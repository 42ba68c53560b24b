"""Domain-wall dynamics under adiabatic spin-transfer torque.

Two engines: a reduced Walker-ansatz model (:mod:`stt_wall.walker`) and a
1-D micromagnetic LLG chain (:mod:`stt_wall.micromag`), plus scenario
drivers (:mod:`stt_wall.experiments`) and file I/O (:mod:`stt_wall.io`).
"""

__version__ = "0.1.0"
