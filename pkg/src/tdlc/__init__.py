"""Desk-scale computation with groups acting on trees and right-angled buildings.

Everything here works on finite truncations (balls of vertices or chambers)
with exact integer/rational arithmetic.  Results that depend on the truncation
radius carry that radius explicitly; nothing claims more than the ball shows.
"""

__version__ = "0.1.0"
