"""
Services package: verification suites, scenario runs and batch execution
"""
