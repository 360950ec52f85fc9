"""A compiler for a small functional hardware description language.

Programs are ML-style expressions whose software part is evaluated at
compile time; what remains is a circuit, emitted as one Verilog module.
"""

from .compiler import CompileFailed, Compilation, compile_source
from .errors import Diagnostic, GeminiError

__version__ = "0.1.0"
__all__ = ["compile_source", "Compilation", "CompileFailed", "Diagnostic", "GeminiError"]
