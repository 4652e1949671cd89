# This source code is licensed under the MIT license. See LICENSE in the repository root directory.

"""Project-local shared helpers: logging, environment configuration and the exception hierarchy.

This package is part of the repository and replaces no installed or vendored package.
"""
