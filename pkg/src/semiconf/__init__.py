"""Construction, verification and factorization of conformal maps of R^n_nu."""
from .core import CausalCharacter, Signature, causal_character, eta_inner

__all__ = ["CausalCharacter", "Signature", "causal_character", "eta_inner"]
__version__ = "0.1.0"
