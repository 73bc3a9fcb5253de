class OblisigError(ValueError):
    """Raised when an algorithm returns bottom or an input violates a contract.

    ``code`` is a short machine-readable reason such as ``"duplicate-message"``.
    """

    def __init__(self, code, detail=""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code}: {detail}" if detail else code)
