"""Build script: compiles the secp256k1 hot kernel when a toolchain is present.

The package works without the extension (a pure-Python kernel is selected at
import time), so a failed compile only costs speed. Set MEDLEDGER_SKIP_EXT=1
to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Degrade to the pure-Python kernel instead of failing the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"WARNING: extension build skipped ({exc}); "
                  "falling back to the pure-Python curve kernel")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: building {ext.name} failed ({exc}); "
                  "falling back to the pure-Python curve kernel")


ext_modules = []
cmdclass = {}
if os.environ.get("MEDLEDGER_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "medledger.crypto._secp256k1",
                    ["src/medledger/crypto/_secp256k1.pyx"],
                    extra_compile_args=["-O3", "-march=native"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
        cmdclass["build_ext"] = optional_build_ext
    except ImportError:
        print("WARNING: Cython not available; using the pure-Python curve kernel")

setup(ext_modules=ext_modules, cmdclass=cmdclass)
