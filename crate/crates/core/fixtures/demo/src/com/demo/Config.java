package com.demo;

import java.util.ArrayList;
import java.util.List;

public class Config {

    private final String name;
    private final List<String> flags;

    {
        // Instance initializer: every instance starts with the audit flag.
        flags = new ArrayList<>();
        flags.add("audit");
    }

    private Config(String name) {
        this.name = name;
        if (name.isEmpty()) {
            throw new IllegalArgumentException("configuration name must not be empty");
        }
    }

    public static Config standard() {
        return new Config("standard");
    }

    public static Config named(String name) {
        return new Config(name);
    }

    public String banner() {
        StringBuilder banner = new StringBuilder(name);
        for (String flag : flags) {
            banner.append('+').append(flag);
        }
        return banner.toString();
    }
}
