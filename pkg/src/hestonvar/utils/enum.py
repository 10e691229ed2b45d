from six import add_metaclass


class EnumValue(object):
    '''A named member of an enumerated type. Members compare equal to
    themselves, to their integer value and to any of their names, which lets
    configuration strings be compared without translating them first.'''

    __slots__ = ('group', 'name', 'value', 'names')

    def __init__(self, group, name, value, other_names=None):
        self.name = name
        self.value = value
        self.names = {name} | set(other_names or ())
        self.group = group

    def __hash__(self):
        return hash(self.name)

    def __int__(self):
        return int(self.value)

    def __eq__(self, other):
        try:
            if self.group is not other.group:
                return False
            return self is other
        except AttributeError:
            return self.value == other or other in self.names

    def __ne__(self, other):
        return not self == other

    def __repr__(self):  # pragma: no cover
        return "<{group_name} {name}:{value}>".format(
            name=self.name, group_name=self.group.__name__, value=self.value)

    def __str__(self):
        return self.name

    def __reduce__(self):
        return self.group, (self.name,)

    def add_name(self, name):
        self.names.add(name)
        type.__setattr__(self.group, name, self)


class EnumMeta(type):
    '''
    A metaclass for types hosting enumerated members. Class attributes are
    translated into :class:`EnumValue` objects carrying the attribute name.
    A class attribute ``__aliases__`` maps extra spellings (for instance the
    hyphenated names used in configuration files) onto members.

    The class itself behaves like a read-only mapping: it can be indexed or
    called with a name or value to look up a member, and iterated over.
    '''

    def __new__(cls, name, parents, attrs):
        aliases = attrs.pop("__aliases__", {})
        enum_type = type.__new__(cls, name, parents, attrs)
        for label, value in list(attrs.items()):
            if label.startswith("__"):
                continue
            type.__delattr__(enum_type, label)
            type.__setattr__(enum_type, label, EnumValue(enum_type, label, value))
        for alias, label in aliases.items():
            enum_type.__dict__[label].add_name(alias)
        return enum_type

    def __iter__(self):
        seen = set()
        for attr, val in self.__dict__.items():
            if isinstance(val, EnumValue) and val.name not in seen:
                seen.add(val.name)
                yield val

    def __contains__(self, k):
        try:
            self.translate(k)
            return True
        except KeyError:
            return False

    def __getitem__(self, k):
        return self.translate(k)

    def __setattr__(self, k, v):
        raise AttributeError("Enum types are read-only")

    def translate(self, k):
        '''
        Translate `k` into a member of the enumeration, first by name (or
        alias), then by value.

        Raises
        ------
        KeyError
            If no member matches
        '''
        if isinstance(k, EnumValue) and k.group is self:
            return k
        val = self.__dict__.get(k) if isinstance(k, str) else None
        if isinstance(val, EnumValue):
            return val
        for member in self:
            if member == k:
                return member
        raise KeyError("Could not translate {0} through {1}".format(k, self))

    def __repr__(self):
        return "<Enum {0}>".format(self.__name__)

    __call__ = translate


@add_metaclass(EnumMeta)
class Enum(object):
    '''
    Base type for enumerations. Reference the attribute members directly;
    the class is never instantiated.
    '''
