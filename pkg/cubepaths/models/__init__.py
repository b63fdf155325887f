"""Value Types"""
